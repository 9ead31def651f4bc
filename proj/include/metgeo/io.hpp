#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "metgeo/diagnostics.hpp"
#include "metgeo/generators.hpp"
#include "metgeo/metric_space.hpp"
#include "metgeo/pretangent.hpp"
#include "metgeo/tolerance.hpp"

namespace metgeo::io {

struct FileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic JSON output. Keys keep insertion order, every real is printed
// with 17 significant digits, and infinities are serialized as "inf" strings;
// NaN must never reach a report.

class JsonValue {
 public:
  static JsonValue object() { return JsonValue(Kind::object); }
  static JsonValue array() { return JsonValue(Kind::array); }
  static JsonValue string(std::string s) {
    JsonValue v(Kind::string);
    v.str_ = std::move(s);
    return v;
  }
  static JsonValue number(double x) {
    if (std::isnan(x)) throw std::logic_error("JsonValue: NaN cannot be serialized");
    JsonValue v(Kind::number);
    v.num_ = x;
    return v;
  }
  static JsonValue integer(std::int64_t x) {
    JsonValue v(Kind::integer);
    v.int_ = x;
    return v;
  }
  static JsonValue boolean(bool b) {
    JsonValue v(Kind::boolean);
    v.bool_ = b;
    return v;
  }
  static JsonValue null() { return JsonValue(Kind::null); }

  JsonValue& set(const std::string& key, JsonValue value) {
    entries_.emplace_back(key, std::move(value));
    return *this;
  }
  JsonValue& push(JsonValue value) {
    items_.push_back(std::move(value));
    return *this;
  }

  std::string dump(int indent = 0) const {
    std::ostringstream os;
    write(os, indent, 0);
    if (indent > 0) os << '\n';
    return os.str();
  }

 private:
  enum class Kind { object, array, string, number, integer, boolean, null };
  explicit JsonValue(Kind k) : kind_(k) {}

  static void write_escaped(std::ostringstream& os, const std::string& s) {
    os << '"';
    for (char c : s) {
      switch (c) {
        case '"': os << "\\\""; break;
        case '\\': os << "\\\\"; break;
        case '\n': os << "\\n"; break;
        case '\t': os << "\\t"; break;
        case '\r': os << "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            os << buf;
          } else {
            os << c;
          }
      }
    }
    os << '"';
  }

  void write(std::ostringstream& os, int indent, int depth) const {
    const std::string pad(indent > 0 ? indent * (depth + 1) : 0, ' ');
    const std::string close_pad(indent > 0 ? indent * depth : 0, ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (kind_) {
      case Kind::object: {
        if (entries_.empty()) {
          os << "{}";
          return;
        }
        os << '{' << nl;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
          os << pad;
          write_escaped(os, entries_[i].first);
          os << (indent > 0 ? ": " : ":");
          entries_[i].second.write(os, indent, depth + 1);
          if (i + 1 < entries_.size()) os << ',';
          os << nl;
        }
        os << close_pad << '}';
        return;
      }
      case Kind::array: {
        if (items_.empty()) {
          os << "[]";
          return;
        }
        os << '[' << nl;
        for (std::size_t i = 0; i < items_.size(); ++i) {
          os << pad;
          items_[i].write(os, indent, depth + 1);
          if (i + 1 < items_.size()) os << ',';
          os << nl;
        }
        os << close_pad << ']';
        return;
      }
      case Kind::string: write_escaped(os, str_); return;
      case Kind::number: {
        if (std::isinf(num_)) {
          os << (num_ > 0 ? "\"inf\"" : "\"-inf\"");
          return;
        }
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", num_);
        os << buf;
        return;
      }
      case Kind::integer: os << int_; return;
      case Kind::boolean: os << (bool_ ? "true" : "false"); return;
      case Kind::null: os << "null"; return;
    }
  }

  Kind kind_;
  std::vector<std::pair<std::string, JsonValue>> entries_;
  std::vector<JsonValue> items_;
  std::string str_;
  double num_ = 0.0;
  std::int64_t int_ = 0;
  bool bool_ = false;
};

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t x) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write file: " + path);
  out << content;
}

// ---------------------------------------------------------------------------
// Distance-matrix and point files.

/// A loaded space plus the optional marked point recorded in the file.
struct LoadedSpace {
  FiniteMetricSpace space;
  std::optional<std::size_t> base;
  MetricValidation validation;  // violations when the matrix fails the axioms

  bool valid() const { return validation.ok(); }
};

inline LoadedSpace load_matrix_json(const nlohmann::json& j, const ToleranceConfig& tol) {
  if (!j.contains("dist")) throw FileError("matrix JSON needs a \"dist\" field");
  std::vector<std::vector<double>> rows;
  for (const auto& row : j.at("dist")) rows.push_back(row.get<std::vector<double>>());
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();

  LoadedSpace out;
  out.validation = validate_metric(rows, tol, labels);
  if (out.validation.ok()) {
    out.space = *out.validation.space;
    if (j.contains("base")) {
      const auto base_label = j.at("base").get<std::string>();
      out.base = out.space.index_of(base_label);
      if (!out.base) throw FileError("base label not found: " + base_label);
    }
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    std::size_t start = 0;
    while (start < field.size() && field[start] == ' ') ++start;
    fields.push_back(field.substr(start));
  }
  return fields;
}

inline std::vector<std::string> nonempty_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::string trimmed = line;
    while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == ' '))
      trimmed.pop_back();
    if (!trimmed.empty()) lines.push_back(trimmed);
  }
  return lines;
}

inline double parse_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw FileError("not a number: \"" + s + "\"");
    return v;
  } catch (const std::logic_error&) {
    throw FileError("not a number: \"" + s + "\"");
  }
}

}  // namespace detail

/// CSV matrix: a header row of labels, then one row of distances per point.
inline LoadedSpace load_matrix_csv(const std::string& text, const ToleranceConfig& tol) {
  auto lines = detail::nonempty_lines(text);
  if (lines.size() < 2) throw FileError("matrix CSV needs a header row and data rows");
  auto labels = detail::split_csv_line(lines[0]);
  const std::size_t n = labels.size();
  if (lines.size() != n + 1)
    throw FileError("matrix CSV: expected " + std::to_string(n) + " data rows, found " +
                    std::to_string(lines.size() - 1));
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto fields = detail::split_csv_line(lines[i]);
    if (fields.size() != n) throw FileError("matrix CSV: ragged row " + std::to_string(i));
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(detail::parse_double(f));
    rows.push_back(std::move(row));
  }
  LoadedSpace out;
  out.validation = validate_metric(rows, tol, labels);
  if (out.validation.ok()) out.space = *out.validation.space;
  return out;
}

/// Points CSV: rows "label,x,y" with an optional "label,x,y" header.
inline FiniteMetricSpace load_points_csv(const std::string& text, MetricKind kind) {
  auto lines = detail::nonempty_lines(text);
  if (lines.empty()) throw FileError("points CSV is empty");
  std::vector<std::string> labels;
  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto fields = detail::split_csv_line(lines[i]);
    if (fields.size() != 3) throw FileError("points CSV: row needs label,x,y");
    if (i == 0 && fields[0] == "label") continue;  // header
    labels.push_back(fields[0]);
    pts.push_back({detail::parse_double(fields[1]), detail::parse_double(fields[2])});
  }
  return from_points(pts, kind, labels);
}

inline JsonValue space_to_json(const FiniteMetricSpace& space,
                               std::optional<std::size_t> base = std::nullopt) {
  JsonValue j = JsonValue::object();
  JsonValue labels = JsonValue::array();
  for (const auto& l : space.labels()) labels.push(JsonValue::string(l));
  j.set("labels", std::move(labels));
  JsonValue rows = JsonValue::array();
  for (std::size_t i = 0; i < space.size(); ++i) {
    JsonValue row = JsonValue::array();
    for (std::size_t k = 0; k < space.size(); ++k) row.push(JsonValue::number(space.dist(i, k)));
    rows.push(std::move(row));
  }
  j.set("dist", std::move(rows));
  if (base) j.set("base", JsonValue::string(space.label(*base)));
  return j;
}

// ---------------------------------------------------------------------------
// Sequence rules and generator specs as JSON blocks.

inline SequenceRule parse_sequence_rule(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "explicit") return SequenceRule::explicit_list(j.at("values").get<std::vector<double>>());
  if (kind == "geometric")
    return SequenceRule::geometric(j.at("q").get<double>(), j.value("scale", 1.0));
  if (kind == "power_square")
    return SequenceRule::power_square(j.at("q").get<double>(), j.value("scale", 1.0));
  if (kind == "inverse_factorial") return SequenceRule::inverse_factorial(j.value("scale", 1.0));
  throw FileError("unknown sequence rule kind: " + kind);
}

inline JsonValue sequence_rule_to_json(const SequenceRule& rule) {
  JsonValue j = JsonValue::object();
  switch (rule.kind()) {
    case SequenceRule::Kind::explicit_list: {
      j.set("kind", JsonValue::string("explicit"));
      JsonValue vals = JsonValue::array();
      for (double v : rule.values()) vals.push(JsonValue::number(v));
      j.set("values", std::move(vals));
      return j;
    }
    case SequenceRule::Kind::geometric:
      j.set("kind", JsonValue::string("geometric"));
      j.set("q", JsonValue::number(rule.q()));
      j.set("scale", JsonValue::number(rule.scale()));
      return j;
    case SequenceRule::Kind::power_square:
      j.set("kind", JsonValue::string("power_square"));
      j.set("q", JsonValue::number(rule.q()));
      j.set("scale", JsonValue::number(rule.scale()));
      return j;
    case SequenceRule::Kind::inverse_factorial:
      j.set("kind", JsonValue::string("inverse_factorial"));
      j.set("scale", JsonValue::number(rule.scale()));
      return j;
    case SequenceRule::Kind::formula:
      throw std::logic_error("formula rules have no file form");
  }
  throw std::logic_error("unreachable");
}

struct GeneratorSpec {
  enum class Kind { scale_separated_line, shrinking_quadruples, random_ultrametric, line_sample, snowflaked };
  Kind kind = Kind::line_sample;
  // scale_separated_line / shrinking_quadruples
  SequenceRule rule = SequenceRule::power_square(0.5);
  std::size_t depth = 6;
  double s = 1.0, t = 2.0;
  // random_ultrametric / line_sample
  std::size_t n = 8;
  double range = 1.0;
  std::uint64_t seed = 0;
  // snowflaked
  std::shared_ptr<GeneratorSpec> inner;
  double exponent = 0.5;
};

inline GeneratorSpec parse_generator_spec(const nlohmann::json& j) {
  GeneratorSpec spec;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "scale_separated_line") {
    spec.kind = GeneratorSpec::Kind::scale_separated_line;
    spec.rule = parse_sequence_rule(j.at("sequence"));
    spec.depth = j.value("depth", std::size_t{6});
  } else if (kind == "shrinking_quadruples") {
    spec.kind = GeneratorSpec::Kind::shrinking_quadruples;
    spec.s = j.at("s").get<double>();
    spec.t = j.at("t").get<double>();
    spec.rule = parse_sequence_rule(j.at("scales"));
    spec.depth = j.value("depth", std::size_t{4});
  } else if (kind == "random_ultrametric") {
    spec.kind = GeneratorSpec::Kind::random_ultrametric;
    spec.n = j.at("n").get<std::size_t>();
    spec.seed = j.value("seed", std::uint64_t{0});
  } else if (kind == "line_sample") {
    spec.kind = GeneratorSpec::Kind::line_sample;
    spec.n = j.at("n").get<std::size_t>();
    spec.range = j.value("range", 1.0);
    spec.seed = j.value("seed", std::uint64_t{0});
  } else if (kind == "snowflaked") {
    spec.kind = GeneratorSpec::Kind::snowflaked;
    spec.inner = std::make_shared<GeneratorSpec>(parse_generator_spec(j.at("inner")));
    spec.exponent = j.at("exponent").get<double>();
  } else {
    throw FileError("unknown generator kind: " + kind);
  }
  return spec;
}

/// Builds the pointed space a generator spec describes. Snowflaked wrappers
/// apply the power transform to the inner space and must yield a metric.
inline PointedSpace materialize(const GeneratorSpec& spec, const ToleranceConfig& tol) {
  switch (spec.kind) {
    case GeneratorSpec::Kind::scale_separated_line: return gen_scale_separated_line(spec.rule, spec.depth, tol).pointed;
    case GeneratorSpec::Kind::shrinking_quadruples:
      return gen_shrinking_quadruples(spec.s, spec.t, spec.rule, spec.depth, tol).pointed;
    case GeneratorSpec::Kind::random_ultrametric:
      return PointedSpace(gen_random_ultrametric(spec.n, spec.seed), 0);
    case GeneratorSpec::Kind::line_sample: return gen_line_sample(spec.n, spec.range, spec.seed);
    case GeneratorSpec::Kind::snowflaked: {
      PointedSpace inner = materialize(*spec.inner, tol);
      auto flaked = snowflake(inner.space, spec.exponent, tol);
      if (!flaked.ok()) throw GeneratorError("snowflaked generator: exponent breaks the metric");
      return PointedSpace(*flaked.space, inner.base);
    }
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Family files.

struct SequenceSpec {
  enum class Kind { constant, scaled, explicit_points, rule };
  std::string name;
  Kind kind = Kind::constant;
  double line_point = 0.0;                // line hosts
  Vec2 plane_point{};                     // plane hosts
  std::string matrix_label;               // matrix hosts
  std::vector<double> line_points;        // explicit, line
  std::vector<Vec2> plane_points;         // explicit, plane
  std::vector<std::string> matrix_labels; // explicit, matrix
  SequenceRule rule = SequenceRule::geometric(0.5);  // rule kind, line hosts
  std::size_t shift = 0;
};

struct FamilyDescription {
  enum class HostKind { line, snowflaked_line, plane, matrix };
  HostKind host_kind = HostKind::line;
  double line_exponent = 1.0;                 // snowflaked_line
  MetricKind plane_norm = MetricKind::linf;   // plane
  FiniteMetricSpace matrix_space;             // matrix
  SequenceRule normalizer = SequenceRule::geometric(0.5);
  std::vector<SequenceSpec> sequences;
};

inline FamilyDescription parse_family(const nlohmann::json& j, const ToleranceConfig& tol) {
  FamilyDescription fam;
  const auto& host = j.at("host");
  const auto host_kind = host.at("kind").get<std::string>();
  if (host_kind == "line") {
    fam.host_kind = FamilyDescription::HostKind::line;
  } else if (host_kind == "snowflaked_line") {
    fam.host_kind = FamilyDescription::HostKind::snowflaked_line;
    fam.line_exponent = host.at("exponent").get<double>();
    if (!(fam.line_exponent > 0.0) || fam.line_exponent > 1.0)
      throw FileError("snowflaked_line host: exponent must lie in (0,1]");
  } else if (host_kind == "plane") {
    fam.host_kind = FamilyDescription::HostKind::plane;
    const auto norm = host.value("norm", std::string("linf"));
    if (norm == "linf")
      fam.plane_norm = MetricKind::linf;
    else if (norm == "euclidean")
      fam.plane_norm = MetricKind::euclidean;
    else
      throw FileError("plane host: unknown norm " + norm);
  } else if (host_kind == "matrix") {
    fam.host_kind = FamilyDescription::HostKind::matrix;
    auto loaded = load_matrix_json(host, tol);
    if (!loaded.valid()) throw FileError("matrix host fails metric validation");
    fam.matrix_space = loaded.space;
  } else if (host_kind == "generator") {
    auto spec = parse_generator_spec(host.at("spec"));
    auto pointed = materialize(spec, tol);
    fam.host_kind = FamilyDescription::HostKind::matrix;
    fam.matrix_space = pointed.space;
  } else {
    throw FileError("unknown host kind: " + host_kind);
  }

  fam.normalizer = parse_sequence_rule(j.at("normalizer"));

  const bool line_like = fam.host_kind == FamilyDescription::HostKind::line ||
                         fam.host_kind == FamilyDescription::HostKind::snowflaked_line;
  for (const auto& sj : j.at("sequences")) {
    SequenceSpec seq;
    seq.name = sj.at("name").get<std::string>();
    const auto kind = sj.at("kind").get<std::string>();
    if (kind == "constant" || kind == "scaled") {
      seq.kind = kind == "constant" ? SequenceSpec::Kind::constant : SequenceSpec::Kind::scaled;
      if (fam.host_kind == FamilyDescription::HostKind::matrix) {
        if (kind == "scaled") throw FileError("matrix hosts have no scalar action");
        seq.matrix_label = sj.at("point").get<std::string>();
      } else if (line_like) {
        seq.line_point = sj.at("point").get<double>();
      } else {
        auto xy = sj.at("point").get<std::vector<double>>();
        if (xy.size() != 2) throw FileError("plane points need two coordinates");
        seq.plane_point = {xy[0], xy[1]};
      }
    } else if (kind == "explicit") {
      seq.kind = SequenceSpec::Kind::explicit_points;
      if (fam.host_kind == FamilyDescription::HostKind::matrix) {
        seq.matrix_labels = sj.at("points").get<std::vector<std::string>>();
      } else if (line_like) {
        seq.line_points = sj.at("points").get<std::vector<double>>();
      } else {
        for (const auto& pj : sj.at("points")) {
          auto xy = pj.get<std::vector<double>>();
          if (xy.size() != 2) throw FileError("plane points need two coordinates");
          seq.plane_points.push_back({xy[0], xy[1]});
        }
      }
    } else if (kind == "rule") {
      if (!line_like) throw FileError("rule sequences are only available on line hosts");
      seq.kind = SequenceSpec::Kind::rule;
      seq.rule = parse_sequence_rule(sj.at("rule"));
      seq.shift = sj.value("shift", std::size_t{0});
    } else {
      throw FileError("unknown sequence kind: " + kind);
    }
    fam.sequences.push_back(std::move(seq));
  }
  if (fam.sequences.empty()) throw FileError("family needs at least one sequence");
  return fam;
}

/// Plain (host-erased) outcome of a family run, ready for reporting.
struct FamilyAnalysis {
  std::vector<std::string> member_names;
  std::vector<std::size_t> window;
  std::vector<ScaledLimit> limits;  // row-major
  bool self_stable = false;
  std::optional<PretangentSnapshot> snapshot;
  std::optional<std::pair<std::size_t, std::size_t>> offending_pair;
  std::optional<RefinementReport> refinement;

  const ScaledLimit& limit(std::size_t i, std::size_t j) const {
    return limits[i * member_names.size() + j];
  }
};

namespace detail {

template <class Host>
FamilyMember<Host> build_member_line(const SequenceSpec& seq) {
  using M = FamilyMember<Host>;
  switch (seq.kind) {
    case SequenceSpec::Kind::constant: return M::constant(seq.name, seq.line_point);
    case SequenceSpec::Kind::scaled: return M::scaled(seq.name, seq.line_point);
    case SequenceSpec::Kind::explicit_points: return M::from_list(seq.name, seq.line_points);
    case SequenceSpec::Kind::rule: {
      auto rule = seq.rule;
      auto shift = seq.shift;
      return M::from_path(seq.name, [rule, shift](std::size_t n) { return rule.at(n + shift); });
    }
  }
  throw std::logic_error("unreachable");
}

template <class Host>
FamilyAnalysis run_family_typed(Host host, std::vector<FamilyMember<Host>> members,
                                const SequenceRule& normalizer,
                                const std::vector<std::size_t>& window,
                                const std::optional<std::vector<std::size_t>>& refine,
                                const ToleranceConfig& tol) {
  auto fam = mutual_stability_matrix(std::move(host), std::move(members), normalizer, window, tol);
  FamilyAnalysis out;
  for (const auto& m : fam.members) out.member_names.push_back(m.name);
  out.window = fam.window;
  out.limits = fam.limits;
  out.self_stable = fam.self_stable();
  auto ident = metric_identification(fam, tol);
  out.snapshot = std::move(ident.snapshot);
  out.offending_pair = ident.offending_pair;
  if (refine) out.refinement = subsequence_refinement(fam, *refine, tol);
  return out;
}

}  // namespace detail

inline FamilyAnalysis run_family(const FamilyDescription& fam,
                                 const std::vector<std::size_t>& window,
                                 const std::optional<std::vector<std::size_t>>& refine,
                                 const ToleranceConfig& tol) {
  switch (fam.host_kind) {
    case FamilyDescription::HostKind::line: {
      std::vector<FamilyMember<LineHost>> members;
      for (const auto& s : fam.sequences) members.push_back(detail::build_member_line<LineHost>(s));
      return detail::run_family_typed(LineHost{}, std::move(members), fam.normalizer, window,
                                      refine, tol);
    }
    case FamilyDescription::HostKind::snowflaked_line: {
      std::vector<FamilyMember<PowerLineHost>> members;
      for (const auto& s : fam.sequences)
        members.push_back(detail::build_member_line<PowerLineHost>(s));
      return detail::run_family_typed(PowerLineHost{fam.line_exponent}, std::move(members),
                                      fam.normalizer, window, refine, tol);
    }
    case FamilyDescription::HostKind::plane: {
      std::vector<FamilyMember<PlaneHost>> members;
      for (const auto& s : fam.sequences) {
        using M = FamilyMember<PlaneHost>;
        switch (s.kind) {
          case SequenceSpec::Kind::constant: members.push_back(M::constant(s.name, s.plane_point)); break;
          case SequenceSpec::Kind::scaled: members.push_back(M::scaled(s.name, s.plane_point)); break;
          case SequenceSpec::Kind::explicit_points:
            members.push_back(M::from_list(s.name, s.plane_points));
            break;
          case SequenceSpec::Kind::rule: throw FileError("rule sequences need a line host");
        }
      }
      return detail::run_family_typed(PlaneHost{fam.plane_norm}, std::move(members),
                                      fam.normalizer, window, refine, tol);
    }
    case FamilyDescription::HostKind::matrix: {
      const auto& space = fam.matrix_space;
      auto index_of = [&space](const std::string& label) {
        auto idx = space.index_of(label);
        if (!idx) throw FileError("matrix host: unknown label " + label);
        return *idx;
      };
      std::vector<FamilyMember<MatrixHost>> members;
      for (const auto& s : fam.sequences) {
        using M = FamilyMember<MatrixHost>;
        switch (s.kind) {
          case SequenceSpec::Kind::constant:
            members.push_back(M::constant(s.name, index_of(s.matrix_label)));
            break;
          case SequenceSpec::Kind::explicit_points: {
            std::vector<std::size_t> pts;
            for (const auto& l : s.matrix_labels) pts.push_back(index_of(l));
            members.push_back(M::from_list(s.name, pts));
            break;
          }
          default: throw FileError("matrix hosts support constant and explicit sequences");
        }
      }
      return detail::run_family_typed(MatrixHost{space}, std::move(members), fam.normalizer,
                                      window, refine, tol);
    }
  }
  throw std::logic_error("unreachable");
}

/// Canonical family files for the generators that export sequences.
inline JsonValue canonical_family_json(const GeneratorSpec& spec) {
  JsonValue j = JsonValue::object();
  if (spec.kind == GeneratorSpec::Kind::scale_separated_line) {
    JsonValue host = JsonValue::object();
    host.set("kind", JsonValue::string("line"));
    j.set("host", std::move(host));
    j.set("normalizer", sequence_rule_to_json(spec.rule));
    JsonValue seqs = JsonValue::array();
    JsonValue p = JsonValue::object();
    p.set("name", JsonValue::string("p"));
    p.set("kind", JsonValue::string("constant"));
    p.set("point", JsonValue::number(0.0));
    seqs.push(std::move(p));
    JsonValue b = JsonValue::object();
    b.set("name", JsonValue::string("b"));
    b.set("kind", JsonValue::string("rule"));
    b.set("rule", sequence_rule_to_json(spec.rule));
    b.set("shift", JsonValue::integer(0));
    seqs.push(std::move(b));
    JsonValue b1 = JsonValue::object();
    b1.set("name", JsonValue::string("b+1"));
    b1.set("kind", JsonValue::string("rule"));
    b1.set("rule", sequence_rule_to_json(spec.rule));
    b1.set("shift", JsonValue::integer(1));
    seqs.push(std::move(b1));
    j.set("sequences", std::move(seqs));
    return j;
  }
  if (spec.kind == GeneratorSpec::Kind::shrinking_quadruples) {
    JsonValue host = JsonValue::object();
    host.set("kind", JsonValue::string("plane"));
    host.set("norm", JsonValue::string("linf"));
    j.set("host", std::move(host));
    j.set("normalizer", sequence_rule_to_json(spec.rule));
    auto quad = realize_quadruple_linf(spec.s, spec.t);
    JsonValue seqs = JsonValue::array();
    for (std::size_t i = 0; i < 4; ++i) {
      JsonValue sj = JsonValue::object();
      sj.set("name", JsonValue::string("x" + std::to_string(i)));
      sj.set("kind", JsonValue::string("scaled"));
      JsonValue pt = JsonValue::array();
      pt.push(JsonValue::number(quad[i].x));
      pt.push(JsonValue::number(quad[i].y));
      sj.set("point", std::move(pt));
      seqs.push(std::move(sj));
    }
    j.set("sequences", std::move(seqs));
    return j;
  }
  throw FileError("only the scale-separated line and shrinking-quadruple generators export canonical families");
}

inline JsonValue snapshot_to_json(const PretangentSnapshot& snap) {
  JsonValue j = space_to_json(snap.quotient);
  JsonValue prov = JsonValue::object();
  JsonValue members = JsonValue::array();
  for (const auto& name : snap.provenance.member_names) members.push(JsonValue::string(name));
  prov.set("members", std::move(members));
  JsonValue classes = JsonValue::array();
  for (const auto& cls : snap.classes) {
    JsonValue c = JsonValue::array();
    for (std::size_t m : cls) c.push(JsonValue::string(snap.provenance.member_names[m]));
    classes.push(std::move(c));
  }
  prov.set("classes", std::move(classes));
  JsonValue window = JsonValue::array();
  for (std::size_t n : snap.provenance.window)
    window.push(JsonValue::integer(static_cast<std::int64_t>(n)));
  prov.set("window", std::move(window));
  prov.set("normalizer", JsonValue::string(snap.provenance.normalizer));
  prov.set("zero_dist", JsonValue::number(snap.provenance.zero_dist));
  j.set("provenance", std::move(prov));
  return j;
}

}  // namespace metgeo::io
