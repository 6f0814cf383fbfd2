#pragma once

#include <cstdint>
#include <filesystem>

#include "riemocad/linalg.hpp"
#include "riemocad/random.hpp"

namespace riemocad {

/// GPS L1 carrier wavelength in meters.
inline constexpr double kDefaultWavelength = 0.19029;
inline constexpr double kDefaultCodeOverPhase = 100.0;

/// Ground truth for one simulated epoch.
struct Scenario {
  Matrix los;               // S x 3, DD line-of-sight difference rows
  double wavelength = kDefaultWavelength;
  Matrix body_baselines;    // q x A, meters
  Matrix true_rotation;     // 3 x q, orthonormal columns
  IntMatrix true_ambiguities;  // S x A, cycles
  double sigma_phase = 1e-3;   // meters, undifferenced
  double sigma_code = 0.1;     // meters, undifferenced

  Eigen::Index n_sat_dd() const { return los.rows(); }
  Eigen::Index n_baselines() const { return body_baselines.cols(); }
  Eigen::Index q() const { return body_baselines.rows(); }
};

/// Stacked DD observations Y = [Psi; P] with their design and covariance.
///
/// The weight matrix (inverse covariance) and its Cholesky factor are computed
/// once at construction; instances are immutable afterwards.
class ObservationSet {
 public:
  ObservationSet(Matrix y, Matrix design_geometry, Matrix design_ambiguity,
                 Matrix cov_yy, Matrix body_baselines);

  const Matrix& y() const { return y_; }
  const Matrix& design_geometry() const { return design_geometry_; }
  const Matrix& design_ambiguity() const { return design_ambiguity_; }
  const Matrix& cov_yy() const { return cov_yy_; }
  const Matrix& weight() const { return weight_; }
  const Matrix& body_baselines() const { return body_baselines_; }

  Eigen::Index n_sat_dd() const { return design_ambiguity_.cols(); }
  Eigen::Index n_baselines() const { return y_.cols(); }
  Eigen::Index q() const { return body_baselines_.rows(); }

 private:
  Matrix y_;
  Matrix design_geometry_;
  Matrix design_ambiguity_;
  Matrix cov_yy_;
  Matrix body_baselines_;
  Matrix weight_;
};

struct DesignMatrices {
  Matrix geometry;   // 2S x 3, [H; H]
  Matrix ambiguity;  // 2S x S, [lambda I; 0]
};

DesignMatrices build_design_matrices(const Matrix& los, double wavelength);

/// Between-baseline correlation: unit diagonal, 0.5 elsewhere.
Matrix baseline_correlation(Eigen::Index n_baselines);

/// Covariance of one baseline's stacked DD phase and code observations.
Matrix single_baseline_covariance(double sigma_phase, double sigma_code,
                                  Eigen::Index n_sat_dd);

/// P_corr (x) Q_y.
Matrix build_covariance(double sigma_phase, double sigma_code,
                        Eigen::Index n_sat_dd, Eigen::Index n_baselines);

/// Noise-free stacked observations A R X_b + B N (phase) and A R X_b (code).
Matrix noiseless_observations(const Scenario& scenario);

/// Draws Y from the scenario with Gaussian noise of covariance
/// build_covariance(scenario sigmas). When a sigma is zero the stochastic
/// model used for weighting falls back to 1 mm phase and the configured
/// code/phase ratio, since a zero covariance cannot be inverted.
ObservationSet simulate_observations(const Scenario& scenario, std::uint64_t seed);

/// Residual Y - A R X_b - B N.
Matrix residual(const ObservationSet& obs, const Matrix& r, const Matrix& n);

/// ||vec(Y - A R X_b - B N)||^2 weighted by the inverse of cov_yy.
double objective_value(const ObservationSet& obs, const Matrix& r, const Matrix& n);

// --- scenario sampling ------------------------------------------------------

/// Unit line-of-sight vectors (rows) for n satellites: azimuth uniform,
/// elevation on [10, 90] degrees with density proportional to cos(elevation).
Matrix sample_sky(int n_satellites, Rng& rng);

/// DD rows u_i - u_pivot against the highest-elevation (largest z) satellite.
Matrix dd_los_from_unit_vectors(const Matrix& unit_los);

/// Haar-distributed point on St(3, q).
Matrix sample_rotation(Eigen::Index q, Rng& rng);

/// q x A matrix of unit-norm columns with smallest singular value >= 0.1.
Matrix sample_body_baselines(Eigen::Index n_baselines, Rng& rng);

struct ScenarioSpec {
  int n_satellites = 8;
  int n_baselines = 1;
  double sigma_phase = 1e-3;
  double sigma_code = 0.1;
  double wavelength = kDefaultWavelength;
  int ambiguity_range = 50;
};

/// Samples a full scenario. When `unit_los` is non-empty its rows are used as
/// the tracked-satellite geometry instead of a synthetic sky.
Scenario sample_scenario(const ScenarioSpec& spec, Rng& rng,
                         const Matrix& unit_los = Matrix());

/// Reads `sat_id,ux,uy,uz` rows (header required) into an n x 3 matrix of
/// normalized line-of-sight vectors.
Matrix load_geometry_csv(const std::filesystem::path& path);

}  // namespace riemocad
