#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "metgeo/line_embedding.hpp"
#include "metgeo/metric_space.hpp"
#include "metgeo/pretangent.hpp"
#include "metgeo/tolerance.hpp"

namespace metgeo {

struct GeneratorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

/// The scale-separation hypothesis behind the shrinking-copies examples:
/// terms positive and strictly decreasing, with the consecutive ratio
/// b_n/b_{n+1} itself strictly increasing over the checked range. A constant
/// ratio (plain geometric decay) is rejected.
inline void check_divergent_ratio(const SequenceRule& rule, std::size_t last_index,
                                  const ToleranceConfig& tol, const std::string& who) {
  double prev_ratio = 0.0;
  for (std::size_t n = 1; n <= last_index; ++n) {
    const double bn = rule.at(n);
    const double bn1 = rule.at(n + 1);
    if (!(bn > 0.0) || !(bn1 > 0.0) || !std::isfinite(bn))
      throw GeneratorError(who + ": sequence must stay positive over the window");
    if (!(bn1 < bn)) throw GeneratorError(who + ": sequence must be strictly decreasing");
    const double ratio = bn / bn1;
    if (n > 1 && !(ratio > prev_ratio * (1.0 + tol.rel_eq)))
      throw GeneratorError(who + ": ratio b_n/b_{n+1} must be strictly increasing (got " +
                           std::to_string(ratio) + " after " + std::to_string(prev_ratio) +
                           " at n=" + std::to_string(n) + ")");
    prev_ratio = ratio;
  }
}

}  // namespace detail

struct ScaleSeparatedLine {
  PointedSpace pointed;   // p = 0 at index 0, then b_1 > b_2 > ...
  SequenceRule sequence;  // the generating sequence, reusable as normalizer
};

/// The line space {0} U {b_n} whose scales separate so fast that every
/// pretangent collapses to at most two points. Requires the ratio hypothesis
/// checked over the generated range.
inline ScaleSeparatedLine gen_scale_separated_line(const SequenceRule& b_rule, std::size_t depth,
                                                   const ToleranceConfig& tol = {}) {
  if (depth < 1)
    throw std::invalid_argument("gen_scale_separated_line: depth must be at least 1");
  detail::check_divergent_ratio(b_rule, std::max<std::size_t>(depth, 2), tol,
                                "gen_scale_separated_line");

  std::vector<double> xs;
  std::vector<std::string> labels;
  xs.push_back(0.0);
  labels.push_back("p");
  for (std::size_t n = 1; n <= depth; ++n) {
    xs.push_back(b_rule.at(n));
    labels.push_back("b" + std::to_string(n));
  }
  return {PointedSpace(from_reals(xs, labels), 0), b_rule};
}

struct ShrinkingQuadruples {
  PointedSpace pointed;  // p = origin
  SequenceRule scales;   // level scales, reusable as normalizer
  std::vector<FamilyMember<PlaneHost>> canonical_family;  // scaled p0..p3 sequences
  PlaneHost host{MetricKind::linf};
};

/// Shrinking max-norm copies r_n * Y of the pseudo-linear quadruple Y(s, t).
/// The origin (r_n * p0 for every n) is kept once. The canonical sequences
/// x_i(n) = r_n * p_i are exported for pretangent analysis.
inline ShrinkingQuadruples gen_shrinking_quadruples(double s, double t, const SequenceRule& r_rule,
                                                    std::size_t depth,
                                                    const ToleranceConfig& tol = {}) {
  if (depth < 1)
    throw std::invalid_argument("gen_shrinking_quadruples: depth must be at least 1");
  const auto quad = realize_quadruple_linf(s, t);
  detail::check_divergent_ratio(r_rule, std::max<std::size_t>(depth, 2), tol,
                                "gen_shrinking_quadruples");

  std::vector<Vec2> pts;
  std::vector<std::string> labels;
  pts.push_back(quad[0]);
  labels.push_back("p");
  for (std::size_t n = 1; n <= depth; ++n) {
    const double rn = r_rule.at(n);
    for (std::size_t i = 1; i < 4; ++i) {
      pts.push_back(rn * quad[i]);
      labels.push_back("r" + std::to_string(n) + "p" + std::to_string(i));
    }
  }

  ShrinkingQuadruples out{PointedSpace(from_points(pts, MetricKind::linf, labels), 0), r_rule, {}, {}};
  for (std::size_t i = 0; i < 4; ++i)
    out.canonical_family.push_back(
        FamilyMember<PlaneHost>::scaled("x" + std::to_string(i), quad[i]));
  return out;
}

namespace detail {

inline void fill_ultrametric(std::vector<std::vector<double>>& dist,
                             std::vector<std::size_t>& points, double height,
                             std::mt19937_64& rng) {
  if (points.size() <= 1) return;
  std::shuffle(points.begin(), points.end(), rng);

  // Split into two or three nonempty groups and recurse with smaller heights.
  std::uniform_int_distribution<int> group_count(2, points.size() >= 3 ? 3 : 2);
  const int groups = group_count(rng);
  std::vector<std::vector<std::size_t>> parts(groups);
  for (std::size_t i = 0; i < points.size(); ++i)
    parts[i % static_cast<std::size_t>(groups)].push_back(points[i]);

  for (int a = 0; a < groups; ++a)
    for (int b = a + 1; b < groups; ++b)
      for (std::size_t x : parts[a])
        for (std::size_t y : parts[b]) {
          dist[x][y] = height;
          dist[y][x] = height;
        }

  std::uniform_real_distribution<double> shrink(0.25, 0.75);
  for (auto& part : parts) {
    const double child_height = height * shrink(rng);
    fill_ultrametric(dist, part, child_height, rng);
  }
}

}  // namespace detail

/// A random rooted hierarchy with strictly decreasing level heights;
/// d(x, y) is the height of the lowest common ancestor, so the ultra-triangle
/// inequality holds by construction.
inline FiniteMetricSpace gen_random_ultrametric(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_random_ultrametric: need at least 2 points");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> top(0.5, 2.0);
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  std::vector<std::size_t> points(n);
  std::iota(points.begin(), points.end(), 0);
  detail::fill_ultrametric(dist, points, top(rng), rng);

  MetricValidation v = validate_metric(dist);
  if (!v.ok()) throw GeneratorError("gen_random_ultrametric: construction failed validation");
  return *v.space;
}

/// n distinct reals in (0, range] plus the base point 0, usual line metric.
inline PointedSpace gen_line_sample(std::size_t n, double range, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_line_sample: need at least 2 points");
  if (!(range > 0.0)) throw std::invalid_argument("gen_line_sample: range must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, range);

  std::vector<double> xs{0.0};
  std::vector<std::string> labels{"p"};
  while (xs.size() < n + 1) {
    const double x = coord(rng);
    if (!(x > 0.0)) continue;
    bool fresh = true;
    for (double seen : xs)
      if (seen == x) fresh = false;
    if (!fresh) continue;
    xs.push_back(x);
    labels.push_back("x" + std::to_string(xs.size() - 1));
  }
  return PointedSpace(from_reals(xs, labels), 0);
}

}  // namespace metgeo
