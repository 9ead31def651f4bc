#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "metgeo/tolerance.hpp"

namespace metgeo {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }
inline bool operator==(const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }

enum class MetricKind { euclidean, linf };

inline double norm_distance(const Vec2& a, const Vec2& b, MetricKind kind) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  if (kind == MetricKind::linf) return std::max(std::abs(dx), std::abs(dy));
  return std::hypot(dx, dy);
}

/// A labeled finite metric space with a dense symmetric distance matrix.
/// Immutable after construction; all operations on it are pure.
class FiniteMetricSpace {
 public:
  FiniteMetricSpace() = default;
  FiniteMetricSpace(std::vector<std::string> labels, std::vector<double> dist)
      : labels_(std::move(labels)), dist_(std::move(dist)) {
    if (dist_.size() != labels_.size() * labels_.size())
      throw std::invalid_argument("FiniteMetricSpace: matrix size does not match label count");
  }

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }

  double dist(std::size_t i, std::size_t j) const { return dist_[i * size() + j]; }

  double diameter() const {
    double d = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j) d = std::max(d, dist(i, j));
    return d;
  }

  std::optional<std::size_t> index_of(const std::string& label) const {
    for (std::size_t i = 0; i < size(); ++i)
      if (labels_[i] == label) return i;
    return std::nullopt;
  }

  /// Row-major copy of the matrix, mostly for serialization.
  std::vector<std::vector<double>> rows() const {
    std::vector<std::vector<double>> out(size(), std::vector<double>(size()));
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < size(); ++j) out[i][j] = dist(i, j);
    return out;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<double> dist_;  // row-major n*n
};

/// A metric space with a marked base point.
struct PointedSpace {
  FiniteMetricSpace space;
  std::size_t base = 0;

  PointedSpace() = default;
  PointedSpace(FiniteMetricSpace s, std::size_t b) : space(std::move(s)), base(b) {
    if (base >= space.size()) throw std::invalid_argument("PointedSpace: base index out of range");
  }

  double dist_to_base(std::size_t i) const { return space.dist(i, base); }
};

enum class ViolationKind { negative_entry, nonzero_diagonal, asymmetry, positivity, triangle };

struct MetricViolation {
  ViolationKind kind;
  std::size_t i = 0, j = 0, k = 0;  // k used only for triangle failures
  std::string message;
};

struct MetricValidation {
  std::optional<FiniteMetricSpace> space;
  std::vector<MetricViolation> violations;

  bool ok() const { return space.has_value(); }
};

namespace detail {

inline std::string default_label(std::size_t i) { return std::to_string(i); }

inline std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = default_label(i);
  return out;
}

}  // namespace detail

/// Checks all four metric axioms and reports every violation found.
/// Non-square input is a structural error and throws.
inline MetricValidation validate_metric(const std::vector<std::vector<double>>& matrix,
                                        const ToleranceConfig& tol = {},
                                        std::vector<std::string> labels = {}) {
  tol.validate();
  const std::size_t n = matrix.size();
  for (const auto& row : matrix)
    if (row.size() != n) throw std::invalid_argument("validate_metric: matrix is not square");
  if (labels.empty()) labels = detail::default_labels(n);
  if (labels.size() != n) throw std::invalid_argument("validate_metric: label count mismatch");

  MetricValidation result;
  auto add = [&result](ViolationKind kind, std::size_t i, std::size_t j, std::size_t k,
                       std::string msg) {
    result.violations.push_back({kind, i, j, k, std::move(msg)});
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (matrix[i][i] != 0.0)
      add(ViolationKind::nonzero_diagonal, i, i, 0,
          "diagonal entry (" + std::to_string(i) + "," + std::to_string(i) + ") is nonzero");
    for (std::size_t j = 0; j < n; ++j) {
      if (matrix[i][j] < 0.0)
        add(ViolationKind::negative_entry, i, j, 0,
            "negative distance at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      if (j > i) {
        if (!tol.close(matrix[i][j], matrix[j][i]))
          add(ViolationKind::asymmetry, i, j, 0,
              "asymmetry at (" + std::to_string(i) + "," + std::to_string(j) + ")");
        if (!(matrix[i][j] > 0.0) || !(matrix[j][i] > 0.0))
          add(ViolationKind::positivity, i, j, 0,
              "zero distance between distinct points (" + std::to_string(i) + "," +
                  std::to_string(j) + ")");
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (i == k) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || j == k) continue;
        if (!tol.triangle_holds(matrix[i][k], matrix[i][j], matrix[j][k])) {
          std::ostringstream msg;
          msg << "triangle " << matrix[i][k] << " > " << matrix[i][j] << " + " << matrix[j][k]
              << " at (" << i << "," << k << "," << j << ")";
          add(ViolationKind::triangle, i, k, j, msg.str());
        }
      }
    }

  if (result.violations.empty()) {
    std::vector<double> flat(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        // Symmetrize the representation so downstream code sees exact symmetry.
        flat[i * n + j] = i == j ? 0.0 : (j > i ? matrix[i][j] : matrix[j][i]);
      }
    }
    result.space = FiniteMetricSpace(std::move(labels), std::move(flat));
  }
  return result;
}

struct UltrametricCheck {
  bool holds = true;
  std::optional<std::array<std::size_t, 3>> witness;  // (x, y, z) with d(x,y) > max(d(x,z), d(y,z))
};

/// Tests d(x,y) <= max(d(x,z), d(y,z)) over all triples.
inline UltrametricCheck is_ultrametric(const FiniteMetricSpace& space,
                                       const ToleranceConfig& tol = {}) {
  const std::size_t n = space.size();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z) {
        if (z == x || z == y) continue;
        const double lhs = space.dist(x, y);
        const double rhs = std::max(space.dist(x, z), space.dist(y, z));
        if (!tol.leq(lhs, rhs)) return {false, std::array<std::size_t, 3>{x, y, z}};
      }
  return {};
}

struct SnowflakeResult {
  std::optional<FiniteMetricSpace> space;
  std::optional<std::array<std::size_t, 3>> violation;  // (i, k, j): d(i,k) > d(i,j) + d(j,k)

  bool ok() const { return space.has_value(); }
};

/// Raises every distance to the power t. Exponents t <= 1 always yield a
/// metric; larger exponents may break the triangle inequality, in which case
/// the violating triple is reported instead of a space.
inline SnowflakeResult snowflake(const FiniteMetricSpace& space, double t,
                                 const ToleranceConfig& tol = {}) {
  if (!(t > 0.0)) throw std::invalid_argument("snowflake: exponent must be positive");
  const std::size_t n = space.size();
  std::vector<std::vector<double>> powered(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) powered[i][j] = std::pow(space.dist(i, j), t);

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (i == k) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || j == k) continue;
        if (!tol.triangle_holds(powered[i][k], powered[i][j], powered[j][k]))
          return {std::nullopt, std::array<std::size_t, 3>{i, k, j}};
      }
    }

  std::vector<double> flat(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) flat[i * n + j] = j > i ? powered[i][j] : powered[j][i];
  return {FiniteMetricSpace(space.labels(), std::move(flat)), std::nullopt};
}

/// Builds a space from planar points under the chosen norm.
/// Duplicate coordinates are rejected: they would produce zero distances.
inline FiniteMetricSpace from_points(const std::vector<Vec2>& points, MetricKind kind,
                                     std::vector<std::string> labels = {}) {
  if (points.empty()) throw std::invalid_argument("from_points: need at least one point");
  const std::size_t n = points.size();
  if (labels.empty()) labels = detail::default_labels(n);
  if (labels.size() != n) throw std::invalid_argument("from_points: label count mismatch");

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (points[i] == points[j])
        throw std::invalid_argument("from_points: duplicate point at indices " + std::to_string(i) +
                                    " and " + std::to_string(j));

  std::vector<double> flat(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = norm_distance(points[i], points[j], kind);
      flat[i * n + j] = d;
      flat[j * n + i] = d;
    }
  return FiniteMetricSpace(std::move(labels), std::move(flat));
}

inline FiniteMetricSpace from_reals(const std::vector<double>& xs,
                                    std::vector<std::string> labels = {}) {
  std::vector<Vec2> pts(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) pts[i] = {xs[i], 0.0};
  return from_points(pts, MetricKind::linf, std::move(labels));
}

/// The closed ball around the base point, as a pointed subspace.
inline PointedSpace restrict_to_ball(const PointedSpace& pointed, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("restrict_to_ball: radius must be positive");
  const auto& space = pointed.space;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < space.size(); ++i)
    if (i == pointed.base || space.dist(i, pointed.base) <= radius) keep.push_back(i);

  const std::size_t m = keep.size();
  std::vector<std::string> labels(m);
  std::vector<double> flat(m * m, 0.0);
  std::size_t new_base = 0;
  for (std::size_t a = 0; a < m; ++a) {
    labels[a] = space.label(keep[a]);
    if (keep[a] == pointed.base) new_base = a;
    for (std::size_t b = 0; b < m; ++b) flat[a * m + b] = space.dist(keep[a], keep[b]);
  }
  return PointedSpace(FiniteMetricSpace(std::move(labels), std::move(flat)), new_base);
}

}  // namespace metgeo
