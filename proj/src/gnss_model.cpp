#include "riemocad/gnss_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace riemocad {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

Matrix dd_structure(Eigen::Index n) {
  return Matrix::Identity(n, n) + Matrix::Ones(n, n);
}

}  // namespace

ObservationSet::ObservationSet(Matrix y, Matrix design_geometry,
                               Matrix design_ambiguity, Matrix cov_yy,
                               Matrix body_baselines)
    : y_(std::move(y)),
      design_geometry_(std::move(design_geometry)),
      design_ambiguity_(std::move(design_ambiguity)),
      cov_yy_(std::move(cov_yy)),
      body_baselines_(std::move(body_baselines)) {
  const auto rows = y_.rows();
  require(rows % 2 == 0 && rows > 0, "observation matrix must have 2S rows");
  require(design_geometry_.rows() == rows && design_geometry_.cols() == 3,
          "design_geometry must be 2S x 3");
  require(design_ambiguity_.rows() == rows && design_ambiguity_.cols() == rows / 2,
          "design_ambiguity must be 2S x S");
  require(cov_yy_.rows() == y_.size() && cov_yy_.cols() == y_.size(),
          "cov_yy must be 2SA x 2SA");
  require(body_baselines_.cols() == y_.cols(),
          "body_baselines must have one column per baseline");
  require(body_baselines_.rows() == std::min<Eigen::Index>(3, y_.cols()),
          "body_baselines must have q = min(3, A) rows");
  require((cov_yy_ - cov_yy_.transpose()).cwiseAbs().maxCoeff() <=
              1e-12 * cov_yy_.cwiseAbs().maxCoeff(),
          "cov_yy must be symmetric");
  Eigen::LLT<Matrix> llt(cov_yy_);
  require(llt.info() == Eigen::Success, "cov_yy must be positive definite");
  weight_ = llt.solve(Matrix::Identity(cov_yy_.rows(), cov_yy_.cols()));
  weight_ = sym(weight_);
}

DesignMatrices build_design_matrices(const Matrix& los, double wavelength) {
  require(los.cols() == 3, "line-of-sight matrix must have 3 columns");
  require(los.rows() >= 3, "at least 3 DD observations are required for 3D attitude");
  require(wavelength > 0.0, "wavelength must be positive");
  const auto s = los.rows();
  DesignMatrices d;
  d.geometry.resize(2 * s, 3);
  d.geometry << los, los;
  d.ambiguity = Matrix::Zero(2 * s, s);
  d.ambiguity.topRows(s).diagonal().setConstant(wavelength);
  return d;
}

Matrix baseline_correlation(Eigen::Index n_baselines) {
  return 0.5 * (Matrix::Identity(n_baselines, n_baselines) +
                Matrix::Ones(n_baselines, n_baselines));
}

Matrix single_baseline_covariance(double sigma_phase, double sigma_code,
                                  Eigen::Index n_sat_dd) {
  const auto s = n_sat_dd;
  Matrix q = Matrix::Zero(2 * s, 2 * s);
  q.topLeftCorner(s, s) = 2.0 * sigma_phase * sigma_phase * dd_structure(s);
  q.bottomRightCorner(s, s) = 2.0 * sigma_code * sigma_code * dd_structure(s);
  return q;
}

Matrix build_covariance(double sigma_phase, double sigma_code,
                        Eigen::Index n_sat_dd, Eigen::Index n_baselines) {
  require(sigma_phase > 0.0 && sigma_code > 0.0, "sigmas must be positive");
  require(n_sat_dd >= 1 && n_baselines >= 1, "dimensions must be positive");
  return kron(baseline_correlation(n_baselines),
              single_baseline_covariance(sigma_phase, sigma_code, n_sat_dd));
}

Matrix noiseless_observations(const Scenario& sc) {
  const auto d = build_design_matrices(sc.los, sc.wavelength);
  return d.geometry * sc.true_rotation * sc.body_baselines +
         d.ambiguity * to_real(sc.true_ambiguities);
}

ObservationSet simulate_observations(const Scenario& sc, std::uint64_t seed) {
  const auto s = sc.n_sat_dd();
  const auto a = sc.n_baselines();
  const auto d = build_design_matrices(sc.los, sc.wavelength);
  Matrix y = d.geometry * sc.true_rotation * sc.body_baselines +
             d.ambiguity * to_real(sc.true_ambiguities);

  if (sc.sigma_phase > 0.0 || sc.sigma_code > 0.0) {
    // chol(P (x) Q_y) = chol(P) (x) chol(Q_y), and Q_y is block diagonal.
    const Matrix lp = baseline_correlation(a).llt().matrixL();
    const Matrix lc = dd_structure(s).llt().matrixL();
    Matrix ly = Matrix::Zero(2 * s, 2 * s);
    ly.topLeftCorner(s, s) = std::sqrt(2.0) * sc.sigma_phase * lc;
    ly.bottomRightCorner(s, s) = std::sqrt(2.0) * sc.sigma_code * lc;
    const Matrix l = kron(lp, ly);

    Rng rng(seed);
    std::normal_distribution<double> gauss;
    Vector z(y.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = gauss(rng);
    y += unvec(Vector(l * z), y.rows(), y.cols());
  }

  double wp = sc.sigma_phase;
  double wc = sc.sigma_code;
  if (wp <= 0.0) wp = 1e-3;
  if (wc <= 0.0) wc = kDefaultCodeOverPhase * wp;
  return ObservationSet(std::move(y), d.geometry, d.ambiguity,
                        build_covariance(wp, wc, s, a), sc.body_baselines);
}

Matrix residual(const ObservationSet& obs, const Matrix& r, const Matrix& n) {
  require(r.rows() == 3 && r.cols() == obs.q(), "R must be 3 x q");
  require(n.rows() == obs.n_sat_dd() && n.cols() == obs.n_baselines(),
          "N must be S x A");
  return obs.y() - obs.design_geometry() * r * obs.body_baselines() -
         obs.design_ambiguity() * n;
}

double objective_value(const ObservationSet& obs, const Matrix& r, const Matrix& n) {
  return weighted_sq_norm(vec(residual(obs, r, n)), obs.weight());
}

Matrix sample_sky(int n_satellites, Rng& rng) {
  require(n_satellites >= 1, "need at least one satellite");
  constexpr double kCutoff = 10.0 * std::numbers::pi / 180.0;
  std::uniform_real_distribution<double> az_dist(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> sin_el_dist(std::sin(kCutoff), 1.0);
  Matrix u(n_satellites, 3);
  for (int i = 0; i < n_satellites; ++i) {
    const double az = az_dist(rng);
    const double el = std::asin(sin_el_dist(rng));
    u.row(i) << std::cos(el) * std::sin(az), std::cos(el) * std::cos(az), std::sin(el);
  }
  return u;
}

Matrix dd_los_from_unit_vectors(const Matrix& unit_los) {
  require(unit_los.cols() == 3 && unit_los.rows() >= 2,
          "need at least two line-of-sight vectors");
  Eigen::Index pivot = 0;
  unit_los.col(2).maxCoeff(&pivot);
  Matrix h(unit_los.rows() - 1, 3);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < unit_los.rows(); ++i) {
    if (i == pivot) continue;
    h.row(k++) = unit_los.row(i) - unit_los.row(pivot);
  }
  return h;
}

Matrix sample_rotation(Eigen::Index q, Rng& rng) {
  require(q >= 1 && q <= 3, "q must be in {1, 2, 3}");
  std::normal_distribution<double> gauss;
  Matrix g(3, q);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < 3; ++i) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix qf = qr.householderQ() * Matrix::Identity(3, q);
  const Matrix rf = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q; ++j)
    if (rf(j, j) < 0.0) qf.col(j) *= -1.0;
  return qf;
}

Matrix sample_body_baselines(Eigen::Index n_baselines, Rng& rng) {
  require(n_baselines >= 1, "need at least one baseline");
  const auto q = std::min<Eigen::Index>(3, n_baselines);
  std::normal_distribution<double> gauss;
  for (;;) {
    Matrix xb(q, n_baselines);
    for (Eigen::Index j = 0; j < n_baselines; ++j) {
      for (Eigen::Index i = 0; i < q; ++i) xb(i, j) = gauss(rng);
      const double nrm = xb.col(j).norm();
      if (nrm < 1e-12) {
        xb(0, j) = 1.0;
        continue;
      }
      xb.col(j) /= nrm;
    }
    Eigen::JacobiSVD<Matrix> svd(xb);
    if (svd.singularValues().minCoeff() >= 0.1) return xb;
  }
}

Scenario sample_scenario(const ScenarioSpec& spec, Rng& rng, const Matrix& unit_los) {
  require(spec.n_satellites >= 4, "at least 4 satellites are required");
  require(spec.n_baselines >= 1, "at least one baseline is required");
  Scenario sc;
  if (unit_los.size() == 0) {
    sc.los = dd_los_from_unit_vectors(sample_sky(spec.n_satellites, rng));
  } else {
    require(unit_los.rows() >= spec.n_satellites,
            "geometry file has fewer satellites than requested");
    std::vector<Eigen::Index> idx(unit_los.rows());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    Matrix chosen(spec.n_satellites, 3);
    for (int i = 0; i < spec.n_satellites; ++i) chosen.row(i) = unit_los.row(idx[i]);
    sc.los = dd_los_from_unit_vectors(chosen);
  }
  sc.wavelength = spec.wavelength;
  sc.body_baselines = sample_body_baselines(spec.n_baselines, rng);
  sc.true_rotation = sample_rotation(sc.body_baselines.rows(), rng);
  std::uniform_int_distribution<int> amb(-spec.ambiguity_range, spec.ambiguity_range);
  sc.true_ambiguities.resize(sc.los.rows(), spec.n_baselines);
  for (Eigen::Index j = 0; j < sc.true_ambiguities.cols(); ++j)
    for (Eigen::Index i = 0; i < sc.true_ambiguities.rows(); ++i)
      sc.true_ambiguities(i, j) = amb(rng);
  sc.sigma_phase = spec.sigma_phase;
  sc.sigma_code = spec.sigma_code;
  return sc;
}

Matrix load_geometry_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open geometry file: " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty geometry file: " + path.string());
  if (line.rfind("sat_id,ux,uy,uz", 0) != 0)
    throw std::runtime_error("geometry file must start with header sat_id,ux,uy,uz: " +
                             path.string());
  std::vector<Eigen::Vector3d> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 4)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 4 fields");
    Eigen::Vector3d u(std::stod(fields[1]), std::stod(fields[2]), std::stod(fields[3]));
    if (u.norm() < 1e-12)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": zero line-of-sight vector");
    rows.push_back(u.normalized());
  }
  Matrix out(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return out;
}

}  // namespace riemocad
