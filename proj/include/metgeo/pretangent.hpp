#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "metgeo/metric_space.hpp"
#include "metgeo/tolerance.hpp"

namespace metgeo {

struct WindowError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// A positive real sequence indexed from n = 1. Closed forms cover the
/// normalizing sequences used here; explicit lists are window-bounded.
class SequenceRule {
 public:
  enum class Kind { explicit_list, geometric, power_square, inverse_factorial, formula };

  static SequenceRule explicit_list(std::vector<double> values) {
    SequenceRule r;
    r.kind_ = Kind::explicit_list;
    r.values_ = std::move(values);
    return r;
  }
  /// scale * q^n
  static SequenceRule geometric(double q, double scale = 1.0) {
    if (!(q > 0.0) || !(q < 1.0))
      throw std::invalid_argument("SequenceRule::geometric: q must lie in (0,1)");
    if (!(scale > 0.0))
      throw std::invalid_argument("SequenceRule::geometric: scale must be positive");
    SequenceRule r;
    r.kind_ = Kind::geometric;
    r.q_ = q;
    r.scale_ = scale;
    return r;
  }
  /// scale * q^(n^2); the standard way to get ratios r_n/r_{n+1} -> infinity
  static SequenceRule power_square(double q, double scale = 1.0) {
    if (!(q > 0.0) || !(q < 1.0))
      throw std::invalid_argument("SequenceRule::power_square: q must lie in (0,1)");
    if (!(scale > 0.0))
      throw std::invalid_argument("SequenceRule::power_square: scale must be positive");
    SequenceRule r;
    r.kind_ = Kind::power_square;
    r.q_ = q;
    r.scale_ = scale;
    return r;
  }
  /// scale / n!
  static SequenceRule inverse_factorial(double scale = 1.0) {
    if (!(scale > 0.0))
      throw std::invalid_argument("SequenceRule::inverse_factorial: scale must be positive");
    SequenceRule r;
    r.kind_ = Kind::inverse_factorial;
    r.scale_ = scale;
    return r;
  }
  static SequenceRule from_function(std::function<double(std::size_t)> f,
                                    std::string description = "formula") {
    SequenceRule r;
    r.kind_ = Kind::formula;
    r.formula_ = std::move(f);
    r.description_ = std::move(description);
    return r;
  }

  Kind kind() const { return kind_; }
  double q() const { return q_; }
  double scale() const { return scale_; }
  const std::vector<double>& values() const { return values_; }

  double at(std::size_t n) const {
    if (n == 0) throw WindowError("SequenceRule: indices start at 1");
    switch (kind_) {
      case Kind::explicit_list:
        if (n > values_.size())
          throw WindowError("SequenceRule: index " + std::to_string(n) +
                            " exceeds explicit list of length " + std::to_string(values_.size()));
        return values_[n - 1];
      case Kind::geometric:
        return scale_ * std::pow(q_, static_cast<double>(n));
      case Kind::power_square:
        return scale_ * std::pow(q_, static_cast<double>(n) * static_cast<double>(n));
      case Kind::inverse_factorial: {
        double f = 1.0;
        for (std::size_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
        return scale_ / f;
      }
      case Kind::formula:
        return formula_(n);
    }
    throw std::logic_error("SequenceRule: unknown kind");
  }

  std::string describe() const {
    std::ostringstream os;
    switch (kind_) {
      case Kind::explicit_list: os << "explicit[" << values_.size() << "]"; break;
      case Kind::geometric: os << "geometric(q=" << q_ << ",scale=" << scale_ << ")"; break;
      case Kind::power_square: os << "power_square(q=" << q_ << ",scale=" << scale_ << ")"; break;
      case Kind::inverse_factorial: os << "inverse_factorial(scale=" << scale_ << ")"; break;
      case Kind::formula: os << description_; break;
    }
    return os.str();
  }

 private:
  Kind kind_ = Kind::geometric;
  std::vector<double> values_;
  double q_ = 0.5;
  double scale_ = 1.0;
  std::function<double(std::size_t)> formula_;
  std::string description_;
};

/// Checks the normalizing-sequence contract over an evaluation window:
/// positive throughout and numerically decaying to zero across the window.
inline void validate_normalizer(const SequenceRule& rule, const std::vector<std::size_t>& window,
                                const ToleranceConfig& tol = {}) {
  if (window.empty()) throw WindowError("validate_normalizer: empty window");
  for (std::size_t n : window) {
    const double r = rule.at(n);
    if (!(r > 0.0) || !std::isfinite(r))
      throw std::invalid_argument("normalizing sequence is not positive at n=" +
                                  std::to_string(n) + " (value " + std::to_string(r) + ")");
  }
  const double first = rule.at(window.front());
  const double last = rule.at(window.back());
  if (!(last < tol.rel_eq * first))
    throw std::invalid_argument(
        "normalizing sequence does not decay over the window: r(last)/r(first) = " +
        std::to_string(last / first));
}

/// Window of sequence indices n, geometric by default: N, 2N, 4N, ...
inline std::vector<std::size_t> geometric_window(std::size_t start = 8, int doublings = 3) {
  if (start == 0 || doublings < 0) throw WindowError("geometric_window: bad parameters");
  std::vector<std::size_t> w;
  std::size_t n = start;
  for (int i = 0; i <= doublings; ++i) {
    w.push_back(n);
    n *= 2;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Hosts: the ambient spaces point sequences live in.

struct LineHost {
  using Point = double;
  static constexpr bool norm_induced = true;
  double distance(Point a, Point b) const { return std::abs(a - b); }
  Point scaled(double r, Point seed) const { return r * seed; }
  std::string describe_point(Point p) const { return std::to_string(p); }
};

/// The line with metric |x - y|^e for a fixed exponent e in (0, 1]; the
/// snowflaked real line. Not 1-homogeneous, so no exact scaling shortcut.
struct PowerLineHost {
  double exponent = 1.0;
  using Point = double;
  static constexpr bool norm_induced = false;
  double distance(Point a, Point b) const { return std::pow(std::abs(a - b), exponent); }
  Point scaled(double r, Point seed) const { return r * seed; }
  std::string describe_point(Point p) const { return std::to_string(p); }
};

struct PlaneHost {
  MetricKind norm = MetricKind::linf;
  using Point = Vec2;
  static constexpr bool norm_induced = true;
  double distance(const Point& a, const Point& b) const { return norm_distance(a, b, norm); }
  Point scaled(double r, const Point& seed) const { return r * seed; }
  std::string describe_point(const Point& p) const {
    return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")";
  }
};

struct MatrixHost {
  FiniteMetricSpace space;
  using Point = std::size_t;
  static constexpr bool norm_induced = false;
  double distance(Point a, Point b) const { return space.dist(a, b); }
  std::string describe_point(Point p) const { return space.label(p); }
};

// ---------------------------------------------------------------------------
// Point sequences and families.

template <class Host>
struct FamilyMember {
  using Point = typename Host::Point;
  enum class Kind { constant, scaled, path };

  std::string name;
  Kind kind = Kind::constant;
  Point fixed{};                              // constant value or scaling seed
  std::function<Point(std::size_t)> path;     // explicit or closed-form, n >= 1

  static FamilyMember constant(std::string name, Point p) {
    FamilyMember m;
    m.name = std::move(name);
    m.kind = Kind::constant;
    m.fixed = p;
    return m;
  }
  /// x_n = r_n * seed under the family normalizer.
  static FamilyMember scaled(std::string name, Point seed) {
    FamilyMember m;
    m.name = std::move(name);
    m.kind = Kind::scaled;
    m.fixed = seed;
    return m;
  }
  static FamilyMember from_path(std::string name, std::function<Point(std::size_t)> f) {
    FamilyMember m;
    m.name = std::move(name);
    m.kind = Kind::path;
    m.path = std::move(f);
    return m;
  }
  static FamilyMember from_list(std::string name, std::vector<Point> pts) {
    auto list = std::make_shared<std::vector<Point>>(std::move(pts));
    return from_path(std::move(name), [list](std::size_t n) {
      if (n == 0 || n > list->size())
        throw WindowError("point sequence: index " + std::to_string(n) +
                          " exceeds explicit list of length " + std::to_string(list->size()));
      return (*list)[n - 1];
    });
  }

  Point at(std::size_t n, const Host& host, const SequenceRule& normalizer) const {
    switch (kind) {
      case Kind::constant: return fixed;
      case Kind::scaled:
        if constexpr (requires { host.scaled(1.0, fixed); }) {
          return host.scaled(normalizer.at(n), fixed);
        } else {
          throw std::logic_error("scaled sequences need a host with a scalar action");
        }
      case Kind::path: return path(n);
    }
    throw std::logic_error("FamilyMember: unknown kind");
  }
};

enum class LimitStatus { converged, diverged, oscillating };

inline const char* to_string(LimitStatus s) {
  switch (s) {
    case LimitStatus::converged: return "converged";
    case LimitStatus::diverged: return "diverged";
    case LimitStatus::oscillating: return "oscillating";
  }
  return "?";
}

struct ScaledLimit {
  LimitStatus status = LimitStatus::oscillating;
  double value = std::numeric_limits<double>::quiet_NaN();  // set when converged
  std::vector<double> trace;  // evaluated ratios along the window
  bool exact = false;         // produced by the homogeneity shortcut
};

namespace detail {

inline ScaledLimit classify_trace(std::vector<double> trace, const ToleranceConfig& tol) {
  ScaledLimit out;
  out.trace = std::move(trace);
  const auto& v = out.trace;
  bool finite = true;
  for (double x : v)
    if (!std::isfinite(x)) finite = false;

  if (finite) {
    const double last = v.back();
    const std::size_t tail = std::min<std::size_t>(3, v.size());
    bool settled = true;
    for (std::size_t i = v.size() - tail; i < v.size(); ++i)
      if (std::abs(v[i] - last) > tol.rel_eq * std::max(1.0, std::abs(last))) settled = false;
    if (settled) {
      out.status = LimitStatus::converged;
      out.value = last;
      return out;
    }
  }

  bool growing = v.size() >= 2;
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (!(v[i] < v[i + 1])) growing = false;
  if (growing && (v.back() > 1.0 / tol.rel_eq || !std::isfinite(v.back()))) {
    out.status = LimitStatus::diverged;
    return out;
  }
  out.status = LimitStatus::oscillating;
  return out;
}

}  // namespace detail

/// Evaluates d(x_n, y_n) / r_n along the window and classifies the trace:
/// converged when the last three evaluations agree within rel_eq*max(1,v),
/// diverged when the trace grows monotonically past 1/rel_eq, oscillating
/// otherwise. For scaled sequences over a 1-homogeneous host the ratio is
/// independent of n and the seed distance is returned exactly.
template <class Host>
inline ScaledLimit scaled_distance_limit(const Host& host, const FamilyMember<Host>& x,
                                         const FamilyMember<Host>& y, const SequenceRule& r,
                                         const std::vector<std::size_t>& window,
                                         const ToleranceConfig& tol = {}) {
  if (window.empty()) throw WindowError("scaled_distance_limit: empty window");
  using Kind = typename FamilyMember<Host>::Kind;
  if constexpr (Host::norm_induced) {
    if (x.kind == Kind::scaled && y.kind == Kind::scaled) {
      ScaledLimit out;
      out.status = LimitStatus::converged;
      out.value = host.distance(x.fixed, y.fixed);
      out.trace = {out.value};
      out.exact = true;
      return out;
    }
  }
  std::vector<double> trace;
  trace.reserve(window.size());
  for (std::size_t n : window) {
    const double rn = r.at(n);
    trace.push_back(host.distance(x.at(n, host, r), y.at(n, host, r)) / rn);
  }
  return detail::classify_trace(std::move(trace), tol);
}

/// A family of point sequences with the full pairwise limit matrix.
template <class Host>
struct StableFamily {
  Host host;
  std::vector<FamilyMember<Host>> members;
  SequenceRule normalizer = SequenceRule::geometric(0.5);
  std::vector<std::size_t> window;
  std::vector<ScaledLimit> limits;  // row-major members.size()^2

  const ScaledLimit& limit(std::size_t i, std::size_t j) const {
    return limits[i * members.size() + j];
  }
  bool self_stable() const {
    for (const auto& l : limits)
      if (l.status != LimitStatus::converged) return false;
    return true;
  }
  std::optional<std::pair<std::size_t, std::size_t>> first_unstable_pair() const {
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j)
        if (limit(i, j).status != LimitStatus::converged) return std::make_pair(i, j);
    return std::nullopt;
  }
};

/// Evaluates all pairwise scaled limits. Non-convergence is recorded in the
/// matrix, not thrown: whether the limits exist is exactly the question.
template <class Host>
inline StableFamily<Host> mutual_stability_matrix(Host host,
                                                  std::vector<FamilyMember<Host>> members,
                                                  SequenceRule normalizer,
                                                  std::vector<std::size_t> window,
                                                  const ToleranceConfig& tol = {}) {
  validate_normalizer(normalizer, window, tol);
  StableFamily<Host> family;
  family.host = std::move(host);
  family.members = std::move(members);
  family.normalizer = std::move(normalizer);
  family.window = std::move(window);

  const std::size_t n = family.members.size();
  family.limits.assign(n * n, ScaledLimit{});
  for (std::size_t i = 0; i < n; ++i) {
    family.limits[i * n + i] =
        ScaledLimit{LimitStatus::converged, 0.0, std::vector<double>{0.0}, true};
    for (std::size_t j = i + 1; j < n; ++j) {
      ScaledLimit l = scaled_distance_limit(family.host, family.members[i], family.members[j],
                                            family.normalizer, family.window, tol);
      family.limits[i * n + j] = l;
      family.limits[j * n + i] = std::move(l);
    }
  }
  return family;
}

struct SnapshotProvenance {
  std::vector<std::string> member_names;
  std::vector<std::size_t> window;
  std::string normalizer;
  double zero_dist = 0.0;
};

/// Quotient of a self-stable family by the zero-limit relation.
struct PretangentSnapshot {
  std::vector<std::vector<std::size_t>> classes;  // member indices per class
  FiniteMetricSpace quotient;
  SnapshotProvenance provenance;
};

struct IdentificationResult {
  std::optional<PretangentSnapshot> snapshot;
  std::optional<std::pair<std::size_t, std::size_t>> offending_pair;

  bool ok() const { return snapshot.has_value(); }
};

/// Metric identification: members at limit distance below zero_dist collapse
/// into one class; class distances come from representatives and the result
/// is validated as a genuine metric. Refused when any pairwise limit failed
/// to converge.
template <class Host>
inline IdentificationResult metric_identification(const StableFamily<Host>& family,
                                                  const ToleranceConfig& tol = {}) {
  if (auto bad = family.first_unstable_pair()) return {std::nullopt, bad};

  const std::size_t n = family.members.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (family.limit(i, j).value < tol.zero_dist) {
        const std::size_t ri = find(i), rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }

  std::vector<std::vector<std::size_t>> classes;
  std::vector<std::size_t> class_of(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (find(i) == i) {
      class_of[i] = classes.size();
      classes.push_back({i});
    } else {
      class_of[i] = class_of[find(i)];
      classes[class_of[i]].push_back(i);
    }
  }

  const std::size_t m = classes.size();
  std::vector<std::vector<double>> rho(m, std::vector<double>(m, 0.0));
  std::vector<std::string> labels(m);
  for (std::size_t a = 0; a < m; ++a) {
    labels[a] = family.members[classes[a].front()].name;
    for (std::size_t b = 0; b < m; ++b)
      if (a != b) rho[a][b] = family.limit(classes[a].front(), classes[b].front()).value;
  }
  MetricValidation check = validate_metric(rho, tol, labels);
  if (!check.ok())
    throw std::runtime_error("metric_identification: quotient failed metric validation: " +
                             check.violations.front().message);

  PretangentSnapshot snap;
  snap.classes = std::move(classes);
  snap.quotient = std::move(*check.space);
  snap.provenance.window = family.window;
  snap.provenance.normalizer = family.normalizer.describe();
  snap.provenance.zero_dist = tol.zero_dist;
  for (const auto& mbr : family.members) snap.provenance.member_names.push_back(mbr.name);
  return {std::move(snap), std::nullopt};
}

struct RefinementEntry {
  std::size_t i = 0, j = 0;
  ScaledLimit original;
  ScaledLimit refined;
  bool comparable = false;  // both runs converged
  bool matches = false;
};

struct RefinementReport {
  bool preserved = true;
  std::optional<std::pair<std::size_t, std::size_t>> violated;
  std::vector<RefinementEntry> entries;
};

/// Re-evaluates all pairwise limits along a subsequence of indices. The
/// numerical shadow of the subsequence embedding being distance-preserving:
/// every originally converged pair must converge to the same value.
template <class Host>
inline RefinementReport subsequence_refinement(const StableFamily<Host>& family,
                                               const std::vector<std::size_t>& indices,
                                               const ToleranceConfig& tol = {}) {
  if (indices.empty()) throw std::invalid_argument("subsequence_refinement: empty index list");
  for (std::size_t k = 1; k < indices.size(); ++k)
    if (!(indices[k] > indices[k - 1]))
      throw std::invalid_argument("subsequence_refinement: indices must be strictly increasing");

  RefinementReport report;
  const std::size_t n = family.members.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      RefinementEntry e;
      e.i = i;
      e.j = j;
      e.original = family.limit(i, j);
      e.refined = scaled_distance_limit(family.host, family.members[i], family.members[j],
                                        family.normalizer, indices, tol);
      e.comparable = e.original.status == LimitStatus::converged &&
                     e.refined.status == LimitStatus::converged;
      e.matches = e.comparable && std::abs(e.original.value - e.refined.value) <=
                                      tol.rel_eq * std::max(1.0, std::abs(e.original.value));
      if (e.original.status == LimitStatus::converged && !e.matches) {
        report.preserved = false;
        if (!report.violated) report.violated = std::make_pair(i, j);
      }
      report.entries.push_back(std::move(e));
    }
  return report;
}

struct IdentityCheck {
  bool holds = true;
  double worst_residual = 0.0;
  std::optional<std::array<std::size_t, 3>> witness;
};

/// Verifies rho(b,d) = (rho(b,g)^s0 + rho(d,g)^s0)^(1/s0) over all ordered
/// triples with rho(b,d) >= rho(b,g) >= rho(g,d) > 0; the s0 = infinity
/// reading replaces the power sum by the maximum. Vacuous below three points.
inline IdentityCheck check_power_sum_identity(const FiniteMetricSpace& quotient, double s0,
                                           const ToleranceConfig& tol = {}) {
  if (!(s0 >= 1.0) && !std::isinf(s0))
    throw std::invalid_argument("check_power_sum_identity: s0 must be >= 1 or infinite");
  IdentityCheck out;
  const std::size_t n = quotient.size();
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t g = 0; g < n; ++g) {
      if (g == b) continue;
      for (std::size_t d = 0; d < n; ++d) {
        if (d == b || d == g) continue;
        const double long_side = quotient.dist(b, d);
        const double leg1 = quotient.dist(b, g);
        const double leg2 = quotient.dist(g, d);
        if (!(long_side >= leg1 && leg1 >= leg2 && leg2 > 0.0)) continue;
        const double rhs = std::isinf(s0)
                               ? std::max(leg1, leg2)
                               : std::pow(std::pow(leg1, s0) + std::pow(leg2, s0), 1.0 / s0);
        const double residual = std::abs(long_side - rhs) / long_side;
        if (residual > out.worst_residual) {
          out.worst_residual = residual;
          out.witness = std::array<std::size_t, 3>{b, g, d};
        }
      }
    }
  out.holds = out.worst_residual <= tol.rel_eq;
  return out;
}

inline IdentityCheck check_power_sum_identity(const PretangentSnapshot& snapshot, double s0,
                                           const ToleranceConfig& tol = {}) {
  return check_power_sum_identity(snapshot.quotient, s0, tol);
}

}  // namespace metgeo
