#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace torus_lab {

// Lattice location (a, b) of the first offending sample, when there is one.
struct GridLocation {
  int a = 0;
  int b = 0;
};

class GeometryError : public std::runtime_error {
 public:
  explicit GeometryError(const std::string& what,
                         std::optional<GridLocation> where = std::nullopt)
      : std::runtime_error(what), where_(where) {}

  const std::optional<GridLocation>& where() const noexcept { return where_; }

 private:
  std::optional<GridLocation> where_;
};

// Raised when a symmetric tensor that must be a Riemannian metric is not
// positive-definite somewhere.
class NotPositiveDefinite : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

// A numerical certificate (compatibility, trace-freeness, volume
// preservation) failed its tolerance.
class CertificateError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

}  // namespace torus_lab
