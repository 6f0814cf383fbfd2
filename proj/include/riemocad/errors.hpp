#pragma once

#include <stdexcept>
#include <string>

namespace riemocad {

/// The normal matrix of a float solve is singular or too ill-conditioned.
class DegenerateGeometry : public std::runtime_error {
 public:
  explicit DegenerateGeometry(const std::string& what)
      : std::runtime_error("degenerate geometry: " + what) {}
};

/// A numerical routine could not produce a valid result (e.g. a retraction
/// landed on a rank-deficient point).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace riemocad
