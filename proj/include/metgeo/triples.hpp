#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "metgeo/metric_space.hpp"
#include "metgeo/tolerance.hpp"

namespace metgeo {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// The exponent s with a^s + b^s = c^s for a triple with legs a, b and long
/// side c, or infinity when the legs are not both shorter than the long side.
struct TripleExponent {
  double value = kInf;
  double residual = 0.0;

  bool finite() const { return std::isfinite(value); }
};

/// An ordered index triple (x, y, z) with d(x,z) >= d(x,y) >= d(y,z) > 0.
struct PlusTriple {
  std::size_t x = 0, y = 0, z = 0;
};

/// Solves a^s + b^s = c^s for the triple exponent.
///
/// a and b are the two legs through the middle point, c is the remaining
/// side. If max(a,b) >= c (up to rel_eq slack) there is no finite solution
/// and the result is infinity. Otherwise the map s -> (a/c)^s + (b/c)^s is
/// strictly decreasing, crosses 1 exactly once in [1, log2/log(c/max(a,b))],
/// and bisection converges unconditionally.
inline TripleExponent solve_s_exponent(double a, double b, double c,
                                       const ToleranceConfig& tol = {}) {
  if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0))
    throw std::invalid_argument("solve_s_exponent: distances must be positive");
  if (a + b < c * (1.0 - tol.rel_eq))
    throw std::domain_error("solve_s_exponent: not a metric triple (a + b < c)");

  const double longest_leg = std::max(a, b);
  if (longest_leg >= c * (1.0 - tol.rel_eq)) return {kInf, 0.0};

  const double ra = a / c;
  const double rb = b / c;
  auto residual_at = [&](double s) { return std::pow(ra, s) + std::pow(rb, s) - 1.0; };

  double lo = 1.0;
  double hi = std::log(2.0) / std::log(c / longest_leg);
  double f_lo = residual_at(lo);
  if (std::abs(f_lo) <= tol.root_tol) return {lo, std::abs(f_lo)};
  // a + b marginally below c (inside the rel_eq slack): the root sits at the
  // boundary of the admissible range
  if (f_lo < 0.0) return {lo, std::abs(f_lo)};
  double f_hi = residual_at(hi);
  if (std::abs(f_hi) <= tol.root_tol) return {hi, std::abs(f_hi)};

  // f_lo >= 0 >= f_hi: at s=1 the triangle inequality gives ra + rb >= 1 and
  // at the upper end (max/c)^hi = 1/2 bounds the sum by 1.
  double mid = lo;
  double f_mid = f_lo;
  for (int iter = 0; iter < 500; ++iter) {
    mid = 0.5 * (lo + hi);
    f_mid = residual_at(mid);
    if (std::abs(f_mid) <= tol.root_tol) return {mid, std::abs(f_mid)};
    if (f_mid > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= std::numeric_limits<double>::epsilon() * hi) break;
  }
  return {mid, std::abs(f_mid)};
}

/// Triple exponent with the middle point passed last: legs d(x,z), d(z,y),
/// long side d(x,y). Zero legs or a zero long side fall on the infinity
/// branch because the legs are then not both strictly shorter than the side.
inline TripleExponent triple_s(const FiniteMetricSpace& space, std::size_t x, std::size_t y,
                               std::size_t z, const ToleranceConfig& tol = {}) {
  if (x == y || y == z || x == z)
    throw std::invalid_argument("triple_s: indices must be distinct");
  const double a = space.dist(x, z);
  const double b = space.dist(z, y);
  const double c = space.dist(x, y);
  if (!(c > 0.0) || std::max(a, b) >= c * (1.0 - tol.rel_eq)) return {kInf, 0.0};
  return solve_s_exponent(a, b, c, tol);
}

/// Triple exponent of an unordered triple: legs are the two smallest of the
/// three pairwise distances, the long side is the largest. This is the value
/// the limit criteria use; it is invariant under permutations of the triple.
inline TripleExponent canonical_triple_s(const FiniteMetricSpace& space, std::size_t i,
                                         std::size_t j, std::size_t k,
                                         const ToleranceConfig& tol = {}) {
  if (i == j || j == k || i == k)
    throw std::invalid_argument("canonical_triple_s: indices must be distinct");
  std::array<double, 3> d = {space.dist(i, j), space.dist(j, k), space.dist(i, k)};
  std::sort(d.begin(), d.end());
  if (!(d[2] > 0.0) || d[1] >= d[2] * (1.0 - tol.rel_eq)) return {kInf, 0.0};
  return solve_s_exponent(d[0], d[1], d[2], tol);
}

struct BetweennessExponent {
  double value = kInf;
  /// Argmin triple in middle-point-last order (x, y, z), present when finite.
  std::optional<std::array<std::size_t, 3>> witness;
};

/// Infimum of the triple exponent over all ordered triples of distinct
/// points. Every unordered triple contributes its three middle-point
/// choices. Infinite when no triple admits a finite exponent or card < 3.
inline BetweennessExponent betweenness_exponent(const FiniteMetricSpace& space,
                                                const ToleranceConfig& tol = {}) {
  BetweennessExponent result;
  const std::size_t n = space.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        const std::array<std::array<std::size_t, 3>, 3> orderings = {{
            {j, k, i},  // middle i
            {i, k, j},  // middle j
            {i, j, k},  // middle k
        }};
        for (const auto& o : orderings) {
          const TripleExponent s = triple_s(space, o[0], o[1], o[2], tol);
          if (s.value < result.value) {
            result.value = s.value;
            result.witness = o;
          }
        }
      }
  return result;
}

/// True when y lies metrically between x and z: d(x,z) = d(x,y) + d(y,z).
inline bool lies_between(const FiniteMetricSpace& space, std::size_t x, std::size_t y,
                         std::size_t z, const ToleranceConfig& tol = {}) {
  if (x == y || y == z || x == z)
    throw std::invalid_argument("lies_between: indices must be distinct");
  return tol.close(space.dist(x, z), space.dist(x, y) + space.dist(y, z));
}

struct MClassCheck {
  bool holds = true;
  std::optional<std::array<std::size_t, 3>> witness;  // non-additive triple (indices ascending)
};

/// Membership in the class of spaces whose every triple, ordered by
/// distance, is additive: largest distance equals the sum of the other two.
/// Vacuously true for fewer than three points.
inline MClassCheck is_in_M_class(const FiniteMetricSpace& space, const ToleranceConfig& tol = {}) {
  const std::size_t n = space.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        std::array<double, 3> d = {space.dist(i, j), space.dist(j, k), space.dist(i, k)};
        std::sort(d.begin(), d.end());
        if (!tol.close(d[2], d[0] + d[1])) return {false, std::array<std::size_t, 3>{i, j, k}};
      }
  return {};
}

/// All ordered triples (x, y, z) with d(x,z) >= d(x,y) >= d(y,z) > 0.
/// Ties are included; the list is empty exactly when card < 3.
inline std::vector<PlusTriple> enumerate_plus_triples(const FiniteMetricSpace& space) {
  std::vector<PlusTriple> out;
  const std::size_t n = space.size();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x) continue;
      for (std::size_t z = 0; z < n; ++z) {
        if (z == x || z == y) continue;
        const double dxz = space.dist(x, z);
        const double dxy = space.dist(x, y);
        const double dyz = space.dist(y, z);
        if (dxz >= dxy && dxy >= dyz && dyz > 0.0) out.push_back({x, y, z});
      }
    }
  return out;
}

inline std::vector<double> nonincreasing_rearrangement(std::vector<double> v) {
  std::sort(v.begin(), v.end(), std::greater<double>());
  return v;
}

/// Generalized power sum (sum of x_i^t)^(1/t); decreases in t toward max(x).
inline double power_sum(const std::vector<double>& x, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("power_sum: exponent must be positive");
  if (x.empty()) throw std::invalid_argument("power_sum: empty vector");
  double acc = 0.0;
  for (double xi : x) {
    if (!(xi > 0.0)) throw std::invalid_argument("power_sum: entries must be positive");
    acc += std::pow(xi, t);
  }
  return std::pow(acc, 1.0 / t);
}

}  // namespace metgeo
