#pragma once

#include <stdexcept>
#include <string>

namespace bimeixner {

// Tilting parameter outside (or on the boundary of) the family's open domain.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument value (non-positive time, inadmissible (p, r), bad ordering, ...).
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

// Adaptive quadrature exhausted its subdivision budget without converging.
class IntegrationError : public std::runtime_error {
 public:
  explicit IntegrationError(const std::string& what) : std::runtime_error(what) {}
};

// Inverse-CDF tabulation failed (density mass check or refinement budget).
class TabulationError : public std::runtime_error {
 public:
  explicit TabulationError(const std::string& what) : std::runtime_error(what) {}
};

// A requested time is not a point of the batch grid.
class GridError : public std::runtime_error {
 public:
  explicit GridError(const std::string& what) : std::runtime_error(what) {}
};

// Regression design matrix is numerically singular.
class SingularDesignError : public std::runtime_error {
 public:
  explicit SingularDesignError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bimeixner
