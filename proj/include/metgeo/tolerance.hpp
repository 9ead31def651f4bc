#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metgeo {

/// Numeric tolerances shared by all comparisons in the library.
///
/// Distances in the supported spaces span many orders of magnitude, so every
/// equality test is relative, scaled by the largest distance appearing in the
/// compared expression.
struct ToleranceConfig {
  double rel_eq = 1e-9;     ///< relative tolerance for distance-equality tests
  double root_tol = 1e-12;  ///< residual tolerance for the exponent solver
  double zero_dist = 1e-9;  ///< below this a quotient distance counts as zero

  void validate() const {
    if (!(rel_eq > 0.0) || !(rel_eq < 1.0))
      throw std::invalid_argument("ToleranceConfig: rel_eq must lie in (0,1)");
    if (!(root_tol > 0.0))
      throw std::invalid_argument("ToleranceConfig: root_tol must be positive");
    if (!(zero_dist > 0.0))
      throw std::invalid_argument("ToleranceConfig: zero_dist must be positive");
  }

  /// |a - b| <= rel_eq * max(|a|, |b|). Exact zeros compare equal.
  bool close(double a, double b) const {
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= rel_eq * scale;
  }

  /// a <= b, allowing rel_eq slack at the scale of the larger operand.
  bool leq(double a, double b) const {
    return a <= b + rel_eq * std::max(std::abs(a), std::abs(b));
  }

  /// a <= b + c with slack scaled by the largest of the three terms.
  bool triangle_holds(double a, double b, double c) const {
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
    return a <= b + c + rel_eq * scale;
  }
};

}  // namespace metgeo
