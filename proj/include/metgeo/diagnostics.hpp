#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "metgeo/metric_space.hpp"
#include "metgeo/tolerance.hpp"
#include "metgeo/triples.hpp"

namespace metgeo {

/// Pair diagnostic F(x,y) = d(x,y) * min(d(x,p), d(y,p)) / max(d(x,p), d(y,p))^2,
/// zero when both arguments are the base point. Always lies in [0, 2].
inline double f_value(const PointedSpace& pointed, std::size_t x, std::size_t y) {
  if (x == pointed.base && y == pointed.base) return 0.0;
  const double dxy = pointed.space.dist(x, y);
  const double dx = pointed.dist_to_base(x);
  const double dy = pointed.dist_to_base(y);
  const double mx = std::max(dx, dy);
  if (mx == 0.0) return 0.0;  // pseudometric data: both points sit on p
  return dxy * std::min(dx, dy) / (mx * mx);
}

/// Largest pair diagnostic over the three pairs of a triple.
inline double phi_value(const PointedSpace& pointed, std::size_t x, std::size_t y, std::size_t z) {
  return std::max({f_value(pointed, x, y), f_value(pointed, x, z), f_value(pointed, y, z)});
}

/// Distance spread of a triple: largest pairwise distance over the smallest,
/// infinite when the smallest is zero.
inline double psi_value(const FiniteMetricSpace& space, std::size_t x, std::size_t y,
                        std::size_t z) {
  if (x == y || y == z || x == z)
    throw std::invalid_argument("psi_value: indices must be distinct");
  const std::array<double, 3> d = {space.dist(x, y), space.dist(y, z), space.dist(z, x)};
  const double mn = std::min({d[0], d[1], d[2]});
  const double mx = std::max({d[0], d[1], d[2]});
  if (mn == 0.0) return kInf;
  return mx / mn;
}

/// (s / Phi) * Psi with the convention 1/Phi = infinity when Phi vanishes.
/// Total on extended reals: any infinite factor makes the result infinite.
inline double ultra_criterion_value(double s, double phi, double psi) {
  if (phi == 0.0) return kInf;
  return s / phi * psi;
}

/// Psi * s^2 / (Phi * (s1 - s)^2) with two conventions: the squared factor is
/// 1 when s is infinite, and infinite when s equals s1 (within rel_eq).
inline double s1_criterion_value(double s, double phi, double psi, double s1,
                                 const ToleranceConfig& tol = {}) {
  if (!(s1 > 0.0)) throw std::invalid_argument("s1_criterion_value: s1 must be positive");
  double ratio_sq = 1.0;
  if (std::isfinite(s)) {
    if (tol.close(s, s1)) return kInf;
    const double r = s / (s1 - s);
    ratio_sq = r * r;
  }
  if (phi == 0.0) return kInf;
  return psi * ratio_sq / phi;
}

inline double ultra_criterion(const PointedSpace& pointed, std::size_t x, std::size_t y,
                              std::size_t z, const ToleranceConfig& tol = {}) {
  const TripleExponent s = canonical_triple_s(pointed.space, x, y, z, tol);
  return ultra_criterion_value(s.value, phi_value(pointed, x, y, z),
                               psi_value(pointed.space, x, y, z));
}

inline double s1_criterion(const PointedSpace& pointed, std::size_t x, std::size_t y,
                           std::size_t z, double s1, const ToleranceConfig& tol = {}) {
  const TripleExponent s = canonical_triple_s(pointed.space, x, y, z, tol);
  return s1_criterion_value(s.value, phi_value(pointed, x, y, z),
                            psi_value(pointed.space, x, y, z), s1, tol);
}

/// Everything the limit criteria see for one triple, kept for reporting.
struct TripleDiagnostics {
  std::array<std::size_t, 3> indices{};
  std::array<double, 3> distances{};     // d(x,y), d(y,z), d(x,z)
  std::array<double, 3> base_distances{};  // d(x,p), d(y,p), d(z,p)
  TripleExponent s;
  double f_xy = 0.0, f_xz = 0.0, f_yz = 0.0;
  double phi = 0.0;
  double psi = 1.0;
  double crit_ultra = kInf;
  std::optional<double> crit_s1;
};

inline TripleDiagnostics triple_diagnostics(const PointedSpace& pointed, std::size_t x,
                                            std::size_t y, std::size_t z,
                                            std::optional<double> s1 = std::nullopt,
                                            const ToleranceConfig& tol = {}) {
  TripleDiagnostics d;
  d.indices = {x, y, z};
  d.distances = {pointed.space.dist(x, y), pointed.space.dist(y, z), pointed.space.dist(x, z)};
  d.base_distances = {pointed.dist_to_base(x), pointed.dist_to_base(y), pointed.dist_to_base(z)};
  d.s = canonical_triple_s(pointed.space, x, y, z, tol);
  d.f_xy = f_value(pointed, x, y);
  d.f_xz = f_value(pointed, x, z);
  d.f_yz = f_value(pointed, y, z);
  d.phi = std::max({d.f_xy, d.f_xz, d.f_yz});
  d.psi = psi_value(pointed.space, x, y, z);
  d.crit_ultra = ultra_criterion_value(d.s.value, d.phi, d.psi);
  if (s1) d.crit_s1 = s1_criterion_value(d.s.value, d.phi, d.psi, *s1, tol);
  return d;
}

enum class LimitQuantity { ultra, s1, f_pair, phi };
enum class TripleDomain { all_distinct, plus_triples };
enum class LimitVerdict { diverges, vanishes, bounded, inconclusive };

inline const char* to_string(LimitQuantity q) {
  switch (q) {
    case LimitQuantity::ultra: return "ultra";
    case LimitQuantity::s1: return "s1";
    case LimitQuantity::f_pair: return "F";
    case LimitQuantity::phi: return "Phi";
  }
  return "?";
}

inline const char* to_string(LimitVerdict v) {
  switch (v) {
    case LimitVerdict::diverges: return "diverges";
    case LimitVerdict::vanishes: return "vanishes";
    case LimitVerdict::bounded: return "bounded";
    case LimitVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LimitOptions {
  std::vector<double> schedule;  ///< strictly decreasing radii
  std::size_t budget = 20000;    ///< tuples enumerated or sampled per radius
  std::uint64_t seed = 0;
  double divergence_threshold = 1e3;  ///< criterion value treated as escaping
  double vanish_threshold = 1e-2;     ///< sup level treated as collapsed
  std::optional<double> s1;           ///< required for LimitQuantity::s1
  std::optional<TripleDomain> domain;  ///< default: ultra over all distinct triples,
                                       ///< s1 restricted to positive-distance triples
};

struct RadiusStat {
  double radius = 0.0;
  double value = kInf;        ///< infimum (criteria) or supremum (F/Phi) at this radius
  std::size_t ball_points = 0;
  std::size_t tuples_seen = 0;
  bool exhaustive = true;
};

/// Scale-bucketed trend data for one of the limit quantities. The verdict is
/// a heuristic trend label, never a proof: the underlying limits quantify
/// over all sequences of triples, which no finite computation settles.
struct LimitEstimate {
  LimitQuantity quantity = LimitQuantity::ultra;
  std::vector<RadiusStat> per_radius;
  LimitVerdict verdict = LimitVerdict::inconclusive;
  bool sup_statistic = false;  ///< true for F/Phi (vanishing limits need suprema)
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  double divergence_threshold = 0.0;
  double vanish_threshold = 0.0;
};

/// Geometric radius schedule: diameter/2, halved at each of `steps` stages.
inline std::vector<double> default_schedule(const FiniteMetricSpace& space, int steps = 8,
                                            double ratio = 0.5) {
  if (steps < 1 || !(ratio > 0.0) || !(ratio < 1.0))
    throw std::invalid_argument("default_schedule: bad parameters");
  std::vector<double> out;
  double r = space.diameter() / 2.0;
  for (int k = 0; k < steps; ++k) {
    out.push_back(r);
    r *= ratio;
  }
  return out;
}

/// Radius schedule adapted to the data: geometric interpolation between the
/// largest distance from the base point and the deepest radius that still
/// holds min_points neighbours, so every ball satisfies the estimator's
/// cardinality precondition.
inline std::vector<double> deepening_schedule(const PointedSpace& pointed, int steps = 8,
                                              std::size_t min_points = 3) {
  if (steps < 1) throw std::invalid_argument("deepening_schedule: need at least one step");
  std::vector<double> d;
  for (std::size_t i = 0; i < pointed.space.size(); ++i)
    if (i != pointed.base) d.push_back(pointed.dist_to_base(i));
  if (d.size() < min_points)
    throw EstimationError("deepening_schedule: base point has fewer than " +
                          std::to_string(min_points) + " neighbours");
  std::sort(d.begin(), d.end());
  const double r_hi = d.back();
  const double r_lo = d[min_points - 1];
  if (!(r_lo < r_hi) || steps == 1) return {r_hi};
  std::vector<double> out;
  const double ratio = std::pow(r_lo / r_hi, 1.0 / static_cast<double>(steps - 1));
  double r = r_hi;
  for (int k = 0; k < steps; ++k) {
    out.push_back(r);
    r *= ratio;
  }
  out.back() = r_lo;  // land exactly on the deepest feasible radius
  return out;
}

namespace detail {

inline std::mt19937_64 radius_rng(std::uint64_t seed, std::size_t radius_index) {
  // Splittable stream per radius so parallel evaluation order cannot matter.
  std::seed_seq seq{static_cast<std::uint64_t>(0x9e3779b97f4a7c15ULL), seed,
                    static_cast<std::uint64_t>(radius_index)};
  return std::mt19937_64(seq);
}

inline std::uint64_t combinations(std::uint64_t m, int k) {
  if (k == 2) return m < 2 ? 0 : m * (m - 1) / 2;
  return m < 3 ? 0 : m * (m - 1) * (m - 2) / 6;
}

}  // namespace detail

/// Estimates the limit behavior of a criterion quantity as triples shrink
/// toward the base point. For each radius the quantity is evaluated over all
/// admissible tuples inside the punctured ball (exhaustively when their count
/// fits the budget, otherwise over a seeded sample), keeping the infimum for
/// the criteria and the supremum for F/Phi. Verdicts follow fixed trend
/// rules over the last three radii and are heuristic by nature.
inline LimitEstimate estimate_limit(const PointedSpace& pointed, LimitQuantity quantity,
                                    const LimitOptions& options, const ToleranceConfig& tol = {}) {
  if (options.schedule.empty()) throw EstimationError("estimate_limit: empty radius schedule");
  for (std::size_t k = 1; k < options.schedule.size(); ++k)
    if (!(options.schedule[k] < options.schedule[k - 1]))
      throw EstimationError("estimate_limit: schedule must be strictly decreasing");
  if (quantity == LimitQuantity::s1 && !options.s1)
    throw std::invalid_argument("estimate_limit: s1 quantity requires an s1 value");

  const bool pair_mode = quantity == LimitQuantity::f_pair;
  const bool sup_mode = pair_mode || quantity == LimitQuantity::phi;
  const TripleDomain domain = options.domain.value_or(
      quantity == LimitQuantity::s1 ? TripleDomain::plus_triples : TripleDomain::all_distinct);
  const std::size_t need = pair_mode ? 2 : 3;

  auto pair_quantity = [&](std::size_t i, std::size_t j) { return f_value(pointed, i, j); };
  auto triple_quantity = [&](std::size_t i, std::size_t j, std::size_t k) {
    switch (quantity) {
      case LimitQuantity::ultra: return ultra_criterion(pointed, i, j, k, tol);
      case LimitQuantity::s1: return s1_criterion(pointed, i, j, k, *options.s1, tol);
      case LimitQuantity::phi: return phi_value(pointed, i, j, k);
      default: return 0.0;
    }
  };
  auto triple_admissible = [&](std::size_t i, std::size_t j, std::size_t k) {
    if (domain == TripleDomain::all_distinct) return true;
    // Plus-triple domain: some ordering satisfies the distance chain, which
    // for distinct points only requires all three distances to be positive.
    return pointed.space.dist(i, j) > 0.0 && pointed.space.dist(j, k) > 0.0 &&
           pointed.space.dist(i, k) > 0.0;
  };

  LimitEstimate estimate;
  estimate.quantity = quantity;
  estimate.sup_statistic = sup_mode;
  estimate.budget = options.budget;
  estimate.seed = options.seed;
  estimate.divergence_threshold = options.divergence_threshold;
  estimate.vanish_threshold = options.vanish_threshold;

  for (std::size_t k = 0; k < options.schedule.size(); ++k) {
    const double radius = options.schedule[k];
    std::vector<std::size_t> ball;
    for (std::size_t i = 0; i < pointed.space.size(); ++i)
      if (i != pointed.base && pointed.dist_to_base(i) <= radius) ball.push_back(i);
    if (ball.size() < need)
      throw EstimationError("estimate_limit: ball of radius " + std::to_string(radius) +
                            " holds only " + std::to_string(ball.size()) +
                            " points besides the base point");

    RadiusStat stat;
    stat.radius = radius;
    stat.ball_points = ball.size();
    stat.value = sup_mode ? 0.0 : kInf;
    auto absorb = [&](double v) {
      stat.value = sup_mode ? std::max(stat.value, v) : std::min(stat.value, v);
    };

    const std::uint64_t total = detail::combinations(ball.size(), pair_mode ? 2 : 3);
    if (total <= options.budget) {
      stat.exhaustive = true;
      if (pair_mode) {
        for (std::size_t a = 0; a < ball.size(); ++a)
          for (std::size_t b = a + 1; b < ball.size(); ++b) {
            absorb(pair_quantity(ball[a], ball[b]));
            ++stat.tuples_seen;
          }
      } else {
        for (std::size_t a = 0; a < ball.size(); ++a)
          for (std::size_t b = a + 1; b < ball.size(); ++b)
            for (std::size_t c = b + 1; c < ball.size(); ++c) {
              if (!triple_admissible(ball[a], ball[b], ball[c])) continue;
              absorb(triple_quantity(ball[a], ball[b], ball[c]));
              ++stat.tuples_seen;
            }
      }
    } else {
      stat.exhaustive = false;
      auto rng = detail::radius_rng(options.seed, k);
      std::uniform_int_distribution<std::size_t> pick(0, ball.size() - 1);
      std::size_t attempts = 0;
      while (stat.tuples_seen < options.budget && attempts++ < options.budget * 64) {
        std::size_t a = pick(rng), b = pick(rng), c = pair_mode ? 0 : pick(rng);
        if (a == b || (!pair_mode && (a == c || b == c))) continue;
        if (pair_mode) {
          absorb(pair_quantity(ball[a], ball[b]));
        } else {
          if (!triple_admissible(ball[a], ball[b], ball[c])) continue;
          absorb(triple_quantity(ball[a], ball[b], ball[c]));
        }
        ++stat.tuples_seen;
      }
    }
    if (stat.tuples_seen == 0)
      throw EstimationError("estimate_limit: no admissible tuple inside radius " +
                            std::to_string(radius));
    estimate.per_radius.push_back(stat);
  }

  // Trend rules over the last three radii.
  const auto& stats = estimate.per_radius;
  if (stats.size() < 3) {
    estimate.verdict = LimitVerdict::inconclusive;
    return estimate;
  }
  const double v0 = stats[stats.size() - 3].value;
  const double v1 = stats[stats.size() - 2].value;
  const double v2 = stats[stats.size() - 1].value;
  if (!sup_mode && v0 <= v1 && v1 <= v2 && v2 > options.divergence_threshold) {
    estimate.verdict = LimitVerdict::diverges;
  } else if (sup_mode && v0 > v1 && v1 > v2 && v2 <= options.vanish_threshold) {
    estimate.verdict = LimitVerdict::vanishes;
  } else if (std::isfinite(v0) && std::isfinite(v1) && std::isfinite(v2)) {
    const double mx = std::max({v0, v1, v2});
    const double mn = std::min({v0, v1, v2});
    estimate.verdict =
        (mx - mn) <= 0.10 * mx ? LimitVerdict::bounded : LimitVerdict::inconclusive;
  } else {
    estimate.verdict = LimitVerdict::inconclusive;
  }
  return estimate;
}

}  // namespace metgeo
