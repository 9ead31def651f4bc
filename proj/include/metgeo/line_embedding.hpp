#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "metgeo/metric_space.hpp"
#include "metgeo/tolerance.hpp"

namespace metgeo {

struct LineEmbedding {
  bool success = false;
  std::vector<double> coordinates;  // by point index; meaningful when successful
  double max_error = 0.0;           // worst |gap - distance| seen during verification
  std::optional<std::pair<std::size_t, std::size_t>> failure_pair;
};

/// Attempts an isometric embedding into the real line. A diametral point is
/// an extreme point of any line-embeddable space, so assigning coord(x) =
/// d(a, x) from a diametral endpoint a is correct whenever an embedding
/// exists; the verification pass over all pairs makes the method sound for
/// arbitrary input. Output is normalized to coord(a) = 0, coord(b) > 0.
inline LineEmbedding embed_into_line(const FiniteMetricSpace& space,
                                     const ToleranceConfig& tol = {}) {
  LineEmbedding out;
  const std::size_t n = space.size();
  if (n <= 1) {
    out.success = true;
    out.coordinates.assign(n, 0.0);
    return out;
  }

  std::size_t a = 0;
  double diam = space.dist(0, 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (space.dist(i, j) > diam) {  // ties keep the lowest index pair
        diam = space.dist(i, j);
        a = i;
      }

  out.coordinates.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.coordinates[i] = space.dist(a, i);

  out.success = true;
  for (std::size_t i = 0; i < n && out.success; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double gap = std::abs(out.coordinates[i] - out.coordinates[j]);
      const double d = space.dist(i, j);
      const double err = std::abs(gap - d);
      out.max_error = std::max(out.max_error, err);
      if (err > tol.rel_eq * std::max({gap, d, diam})) {
        out.success = false;
        out.failure_pair = std::make_pair(i, j);
        break;
      }
    }
  return out;
}

/// Post-condition of a successful line embedding: a sphere on the line holds
/// at most two points, so no center may see three equidistant points.
inline bool sphere_cardinality_ok(const FiniteMetricSpace& space, const LineEmbedding& embedding,
                                  const ToleranceConfig& tol = {}) {
  if (!embedding.success) return true;
  const std::size_t n = space.size();
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t x = 0; x < n; ++x) {
      if (x == c) continue;
      std::size_t on_sphere = 1;
      for (std::size_t y = x + 1; y < n; ++y) {
        if (y == c) continue;
        if (tol.close(space.dist(c, x), space.dist(c, y))) ++on_sphere;
      }
      if (on_sphere > 2) return false;
    }
  return true;
}

/// Parameters of a pseudo-linear quadruple: distances pair up as
/// {s, s, t, t, s+t, s+t} under the labeling p0..p3.
struct QuadrupleParams {
  double s = 0.0;
  double t = 0.0;
  std::array<std::size_t, 4> labeling{};  // point indices playing p0, p1, p2, p3
};

/// Searches the 24 labelings of a four-point space for the pseudo-linear
/// pattern d(p0,p1)=d(p2,p3)=s, d(p1,p2)=d(p0,p3)=t, d(p0,p2)=d(p1,p3)=s+t.
/// Returns the first match, canonicalized to s <= t.
inline std::optional<QuadrupleParams> detect_pseudo_linear_quadruple(
    const FiniteMetricSpace& space, const ToleranceConfig& tol = {}) {
  if (space.size() != 4)
    throw std::invalid_argument("detect_pseudo_linear_quadruple: space must have 4 points");

  std::array<std::size_t, 4> perm = {0, 1, 2, 3};
  std::sort(perm.begin(), perm.end());
  do {
    const std::size_t p0 = perm[0], p1 = perm[1], p2 = perm[2], p3 = perm[3];
    const double s = space.dist(p0, p1);
    const double t = space.dist(p1, p2);
    if (!(s > 0.0) || !(t > 0.0)) continue;
    if (!tol.close(space.dist(p2, p3), s)) continue;
    if (!tol.close(space.dist(p0, p3), t)) continue;
    if (!tol.close(space.dist(p0, p2), s + t)) continue;
    if (!tol.close(space.dist(p1, p3), s + t)) continue;
    QuadrupleParams params;
    if (s <= t) {
      params = {s, t, {p0, p1, p2, p3}};
    } else {
      params = {t, s, {p0, p3, p2, p1}};  // swapping p1 and p3 exchanges s and t
    }
    return params;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::nullopt;
}

/// Realizes the pseudo-linear quadruple with parameters (s, t) in the plane
/// under the maximum norm: (0,0), (s,s), (s+t,s-t), (t,-t).
inline std::array<Vec2, 4> realize_quadruple_linf(double s, double t) {
  if (!(s > 0.0) || !(t > 0.0))
    throw std::invalid_argument("realize_quadruple_linf: s and t must be positive");
  return {Vec2{0.0, 0.0}, Vec2{s, s}, Vec2{s + t, s - t}, Vec2{t, -t}};
}

}  // namespace metgeo
