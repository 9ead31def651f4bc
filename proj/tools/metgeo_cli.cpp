// Command-line front end: loads metric spaces, scaled-sequence families and
// generator specs, runs the analyses, and emits deterministic JSON reports
// (stdout) plus a short human summary (stderr).
//
// Exit codes: 0 success, 1 structural or usage error, 2 domain-negative
// result (invalid metric, refused identification, failed snowflake, ...).

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "metgeo/io.hpp"
#include "metgeo/metgeo.hpp"

using namespace metgeo;
using io::JsonValue;

namespace {

struct CommonFlags {
  double tol_rel = 1e-9;
  double tol_root = 1e-12;
  double tol_zero = 1e-9;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";

  ToleranceConfig tolerances() const {
    ToleranceConfig tol{tol_rel, tol_root, tol_zero};
    tol.validate();
    return tol;
  }
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--tol-rel", flags.tol_rel, "relative distance-equality tolerance");
  cmd->add_option("--tol-root", flags.tol_root, "exponent-solver residual tolerance");
  cmd->add_option("--tol-zero", flags.tol_zero, "quotient zero-distance threshold");
  cmd->add_option("--seed", flags.seed, "seed for randomized sampling");
  cmd->add_option("--out", flags.out, "write the JSON report to this path");
  cmd->add_option("--format", flags.format, "report format on stdout: json or text")
      ->check(CLI::IsMember({"json", "text"}));
}

JsonValue tolerance_block(const ToleranceConfig& tol) {
  JsonValue j = JsonValue::object();
  j.set("rel_eq", JsonValue::number(tol.rel_eq));
  j.set("root_tol", JsonValue::number(tol.root_tol));
  j.set("zero_dist", JsonValue::number(tol.zero_dist));
  return j;
}

JsonValue input_block(const std::string& path, const std::string& bytes) {
  JsonValue j = JsonValue::object();
  j.set("path", JsonValue::string(path));
  j.set("digest", JsonValue::string(io::hex64(io::fnv1a64(bytes))));
  return j;
}

struct Report {
  JsonValue json = JsonValue::object();
  std::string summary;
};

int emit_report(const Report& report, const CommonFlags& flags, int exit_code) {
  const std::string machine = report.json.dump(2);
  if (!flags.out.empty()) io::write_file(flags.out, machine);
  if (flags.format == "text") {
    std::cout << report.summary;
  } else {
    std::cout << machine;
  }
  std::cerr << report.summary;
  return exit_code;
}

JsonValue command_echo(const std::string& name, const std::vector<std::string>& args) {
  JsonValue j = JsonValue::object();
  j.set("name", JsonValue::string(name));
  JsonValue arr = JsonValue::array();
  for (const auto& a : args) arr.push(JsonValue::string(a));
  j.set("arguments", std::move(arr));
  return j;
}

// -------------------------------------------------------------------------
// Input loading.

struct LoadedInput {
  PointedSpace pointed;        // base defaults to 0 when the file names none
  bool has_base = false;
  std::vector<MetricViolation> violations;  // nonempty: invalid matrix
  std::string bytes;

  bool valid() const { return violations.empty(); }
};

LoadedInput load_input(const std::string& path, const std::string& base_label, bool points_mode,
                       MetricKind points_norm, const ToleranceConfig& tol) {
  LoadedInput input;
  input.bytes = io::read_file(path);

  const bool is_json = path.size() > 5 && path.substr(path.size() - 5) == ".json";
  if (is_json) {
    auto j = nlohmann::json::parse(input.bytes);
    if (j.contains("kind")) {
      auto spec = io::parse_generator_spec(j);
      input.pointed = io::materialize(spec, tol);
      input.has_base = true;
    } else if (j.contains("dist")) {
      auto loaded = io::load_matrix_json(j, tol);
      if (!loaded.valid()) {
        input.violations = loaded.validation.violations;
        return input;
      }
      input.pointed.space = loaded.space;
      if (loaded.base) {
        input.pointed.base = *loaded.base;
        input.has_base = true;
      }
    } else {
      throw io::FileError("JSON input needs either a \"dist\" matrix or a generator \"kind\"");
    }
  } else if (points_mode) {
    input.pointed.space = io::load_points_csv(input.bytes, points_norm);
  } else {
    auto loaded = io::load_matrix_csv(input.bytes, tol);
    if (!loaded.valid()) {
      input.violations = loaded.validation.violations;
      return input;
    }
    input.pointed.space = loaded.space;
  }

  if (!base_label.empty()) {
    auto idx = input.pointed.space.index_of(base_label);
    if (!idx) throw io::FileError("base label not found: " + base_label);
    input.pointed.base = *idx;
    input.has_base = true;
  }
  return input;
}

JsonValue violations_json(const std::vector<MetricViolation>& violations) {
  JsonValue arr = JsonValue::array();
  for (const auto& v : violations) {
    JsonValue j = JsonValue::object();
    const char* kind = "";
    switch (v.kind) {
      case ViolationKind::negative_entry: kind = "negative_entry"; break;
      case ViolationKind::nonzero_diagonal: kind = "nonzero_diagonal"; break;
      case ViolationKind::asymmetry: kind = "asymmetry"; break;
      case ViolationKind::positivity: kind = "positivity"; break;
      case ViolationKind::triangle: kind = "triangle"; break;
    }
    j.set("kind", JsonValue::string(kind));
    j.set("message", JsonValue::string(v.message));
    arr.push(std::move(j));
  }
  return arr;
}

JsonValue labels_json(const FiniteMetricSpace& space, const std::array<std::size_t, 3>& t) {
  JsonValue arr = JsonValue::array();
  for (std::size_t i : t) arr.push(JsonValue::string(space.label(i)));
  return arr;
}

std::vector<std::size_t> parse_index_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(static_cast<std::size_t>(std::stoull(item)));
  }
  return out;
}

std::vector<double> parse_radius_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

// -------------------------------------------------------------------------
// validate

int cmd_validate(const std::vector<std::string>& args, const std::string& path,
                 const CommonFlags& flags, bool points_mode, MetricKind points_norm) {
  const auto tol = flags.tolerances();
  LoadedInput input = load_input(path, "", points_mode, points_norm, tol);

  Report report;
  report.json.set("command", command_echo("validate", args));
  report.json.set("input", input_block(path, input.bytes));
  report.json.set("tolerances", tolerance_block(tol));

  JsonValue results = JsonValue::object();
  results.set("valid", JsonValue::boolean(input.valid()));
  if (input.valid()) {
    results.set("points", JsonValue::integer(static_cast<std::int64_t>(input.pointed.space.size())));
    results.set("diameter", JsonValue::number(input.pointed.space.diameter()));
  } else {
    results.set("violations", violations_json(input.violations));
  }
  report.json.set("results", std::move(results));
  report.json.set("warnings", JsonValue::array());

  std::ostringstream sum;
  if (input.valid()) {
    sum << "valid metric space: " << input.pointed.space.size() << " points, diameter "
        << input.pointed.space.diameter() << "\n";
  } else {
    sum << "invalid metric space: " << input.violations.size() << " violation(s); first: "
        << input.violations.front().message << "\n";
  }
  report.summary = sum.str();
  return emit_report(report, flags, input.valid() ? 0 : 2);
}

// -------------------------------------------------------------------------
// analyze

int cmd_analyze(const std::vector<std::string>& args, const std::string& path,
                const CommonFlags& flags, bool points_mode, MetricKind points_norm,
                const std::string& base_label, const std::string& mode, double s1,
                const std::string& schedule_text, int steps, std::size_t budget,
                const std::string& domain_text) {
  const auto tol = flags.tolerances();
  LoadedInput input = load_input(path, base_label, points_mode, points_norm, tol);

  Report report;
  report.json.set("command", command_echo("analyze", args));
  report.json.set("input", input_block(path, input.bytes));
  report.json.set("tolerances", tolerance_block(tol));
  JsonValue warnings = JsonValue::array();

  if (!input.valid()) {
    report.json.set("results", JsonValue::object()
                                   .set("valid", JsonValue::boolean(false))
                                   .set("violations", violations_json(input.violations)));
    report.json.set("warnings", std::move(warnings));
    report.summary = "input is not a metric space; see violations\n";
    return emit_report(report, flags, 2);
  }

  const auto& space = input.pointed.space;
  JsonValue results = JsonValue::object();

  auto t0 = betweenness_exponent(space, tol);
  JsonValue t0_json = JsonValue::object();
  t0_json.set("value", JsonValue::number(t0.value));
  t0_json.set("witness", t0.witness ? labels_json(space, *t0.witness) : JsonValue::null());
  results.set("betweenness_exponent", std::move(t0_json));

  auto ultra = is_ultrametric(space, tol);
  JsonValue ultra_json = JsonValue::object();
  ultra_json.set("holds", JsonValue::boolean(ultra.holds));
  ultra_json.set("witness", ultra.witness ? labels_json(space, *ultra.witness) : JsonValue::null());
  results.set("ultrametric", std::move(ultra_json));

  auto m_class = is_in_M_class(space, tol);
  JsonValue m_json = JsonValue::object();
  m_json.set("holds", JsonValue::boolean(m_class.holds));
  m_json.set("witness", m_class.witness ? labels_json(space, *m_class.witness) : JsonValue::null());
  results.set("additive_class", std::move(m_json));

  std::ostringstream sum;
  sum << "t0 = " << (t0.value == kInf ? std::string("inf") : std::to_string(t0.value))
      << "; ultrametric: " << (ultra.holds ? "yes" : "no")
      << "; additive class: " << (m_class.holds ? "yes" : "no") << "\n";

  if (!mode.empty()) {
    if (!input.has_base)
      throw CLI::ValidationError("--mode", "limit modes need --base (or an input with one)");
    LimitOptions opt;
    opt.budget = budget;
    opt.seed = flags.seed;
    if (mode == "s1") {
      if (!(s1 > 0.0)) throw CLI::ValidationError("--s1", "s1 mode needs a positive --s1");
      opt.s1 = s1;
    }
    if (!domain_text.empty())
      opt.domain = domain_text == "plus" ? TripleDomain::plus_triples : TripleDomain::all_distinct;
    const LimitQuantity quantity = mode == "ultra"  ? LimitQuantity::ultra
                                   : mode == "s1"   ? LimitQuantity::s1
                                   : mode == "F"    ? LimitQuantity::f_pair
                                                    : LimitQuantity::phi;
    const std::size_t min_pts = quantity == LimitQuantity::f_pair ? 2 : 3;
    if (schedule_text.empty()) {
      opt.schedule = default_schedule(space, steps);
    } else if (schedule_text == "auto") {
      opt.schedule = deepening_schedule(input.pointed, steps, min_pts);
    } else {
      opt.schedule = parse_radius_list(schedule_text);
    }

    auto est = estimate_limit(input.pointed, quantity, opt, tol);
    JsonValue est_json = JsonValue::object();
    est_json.set("quantity", JsonValue::string(to_string(est.quantity)));
    if (opt.s1) est_json.set("s1", JsonValue::number(*opt.s1));
    est_json.set("statistic", JsonValue::string(est.sup_statistic ? "supremum" : "infimum"));
    JsonValue per_radius = JsonValue::array();
    for (const auto& stat : est.per_radius) {
      JsonValue sj = JsonValue::object();
      sj.set("radius", JsonValue::number(stat.radius));
      sj.set("value", JsonValue::number(stat.value));
      sj.set("ball_points", JsonValue::integer(static_cast<std::int64_t>(stat.ball_points)));
      sj.set("tuples", JsonValue::integer(static_cast<std::int64_t>(stat.tuples_seen)));
      sj.set("exhaustive", JsonValue::boolean(stat.exhaustive));
      per_radius.push(std::move(sj));
    }
    est_json.set("per_radius", std::move(per_radius));
    est_json.set("verdict", JsonValue::string(to_string(est.verdict)));
    est_json.set("budget", JsonValue::integer(static_cast<std::int64_t>(est.budget)));
    est_json.set("seed", JsonValue::integer(static_cast<std::int64_t>(est.seed)));
    est_json.set("divergence_threshold", JsonValue::number(est.divergence_threshold));
    est_json.set("vanish_threshold", JsonValue::number(est.vanish_threshold));
    results.set("limit_estimate", std::move(est_json));
    warnings.push(JsonValue::string(
        "limit verdicts are heuristic trend reports over finitely many triples, not proofs"));
    sum << "limit estimate (" << to_string(est.quantity) << "): verdict " << to_string(est.verdict)
        << " [heuristic]\n";
  }

  report.json.set("results", std::move(results));
  report.json.set("warnings", std::move(warnings));
  report.summary = sum.str();
  return emit_report(report, flags, 0);
}

// -------------------------------------------------------------------------
// pretangent

JsonValue limit_json(const ScaledLimit& l) {
  JsonValue j = JsonValue::object();
  j.set("status", JsonValue::string(to_string(l.status)));
  if (l.status == LimitStatus::converged) j.set("value", JsonValue::number(l.value));
  JsonValue trace = JsonValue::array();
  for (double v : l.trace) trace.push(JsonValue::number(v));
  j.set("trace", std::move(trace));
  j.set("exact", JsonValue::boolean(l.exact));
  return j;
}

int cmd_pretangent(const std::vector<std::string>& args, const std::string& path,
                   const CommonFlags& flags, const std::string& window_text,
                   const std::string& refine_text, const std::string& snapshot_out) {
  const auto tol = flags.tolerances();
  const std::string bytes = io::read_file(path);
  auto fam_json = nlohmann::json::parse(bytes);
  auto fam = io::parse_family(fam_json, tol);

  std::vector<std::size_t> window =
      window_text.empty() ? geometric_window() : parse_index_list(window_text);
  std::optional<std::vector<std::size_t>> refine;
  if (!refine_text.empty()) refine = parse_index_list(refine_text);

  auto analysis = io::run_family(fam, window, refine, tol);

  Report report;
  report.json.set("command", command_echo("pretangent", args));
  report.json.set("input", input_block(path, bytes));
  report.json.set("tolerances", tolerance_block(tol));
  JsonValue warnings = JsonValue::array();
  warnings.push(JsonValue::string(
      "stability and refinement are finite-window evidence; tangency itself quantifies over "
      "all subsequences and has no finite certificate"));

  JsonValue results = JsonValue::object();
  JsonValue members = JsonValue::array();
  for (const auto& name : analysis.member_names) members.push(JsonValue::string(name));
  results.set("members", std::move(members));
  JsonValue window_json = JsonValue::array();
  for (std::size_t n : analysis.window)
    window_json.push(JsonValue::integer(static_cast<std::int64_t>(n)));
  results.set("window", std::move(window_json));

  JsonValue matrix = JsonValue::array();
  const std::size_t n = analysis.member_names.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      JsonValue entry = JsonValue::object();
      entry.set("pair", JsonValue::array()
                            .push(JsonValue::string(analysis.member_names[i]))
                            .push(JsonValue::string(analysis.member_names[j])));
      entry.set("limit", limit_json(analysis.limit(i, j)));
      matrix.push(std::move(entry));
    }
  results.set("stability_matrix", std::move(matrix));
  results.set("self_stable", JsonValue::boolean(analysis.self_stable));

  std::ostringstream sum;
  int exit_code = 0;
  if (analysis.snapshot) {
    results.set("snapshot", io::snapshot_to_json(*analysis.snapshot));
    if (!snapshot_out.empty())
      io::write_file(snapshot_out, io::snapshot_to_json(*analysis.snapshot).dump(2));
    sum << "self-stable family; snapshot has " << analysis.snapshot->classes.size()
        << " class(es)\n";
  } else {
    JsonValue refused = JsonValue::object();
    refused.set("pair",
                JsonValue::array()
                    .push(JsonValue::string(analysis.member_names[analysis.offending_pair->first]))
                    .push(JsonValue::string(analysis.member_names[analysis.offending_pair->second])));
    results.set("identification_refused", std::move(refused));
    sum << "identification refused: pair ("
        << analysis.member_names[analysis.offending_pair->first] << ", "
        << analysis.member_names[analysis.offending_pair->second]
        << ") has no finite scaled limit on this window\n";
    exit_code = 2;
  }

  if (analysis.refinement) {
    const auto& ref = *analysis.refinement;
    JsonValue rj = JsonValue::object();
    rj.set("preserved", JsonValue::boolean(ref.preserved));
    if (ref.violated)
      rj.set("violated_pair",
             JsonValue::array()
                 .push(JsonValue::string(analysis.member_names[ref.violated->first]))
                 .push(JsonValue::string(analysis.member_names[ref.violated->second])));
    JsonValue entries = JsonValue::array();
    for (const auto& e : ref.entries) {
      JsonValue ej = JsonValue::object();
      ej.set("pair", JsonValue::array()
                         .push(JsonValue::string(analysis.member_names[e.i]))
                         .push(JsonValue::string(analysis.member_names[e.j])));
      ej.set("original", limit_json(e.original));
      ej.set("refined", limit_json(e.refined));
      ej.set("comparable", JsonValue::boolean(e.comparable));
      ej.set("matches", JsonValue::boolean(e.matches));
      entries.push(std::move(ej));
    }
    rj.set("entries", std::move(entries));
    results.set("refinement", std::move(rj));
    sum << "refinement: " << (ref.preserved ? "preserved" : "violated") << "\n";
  }

  report.json.set("results", std::move(results));
  report.json.set("warnings", std::move(warnings));
  report.summary = sum.str();
  return emit_report(report, flags, exit_code);
}

// -------------------------------------------------------------------------
// embed

int cmd_embed(const std::vector<std::string>& args, const std::string& path,
              const CommonFlags& flags, bool points_mode, MetricKind points_norm) {
  const auto tol = flags.tolerances();
  LoadedInput input = load_input(path, "", points_mode, points_norm, tol);

  Report report;
  report.json.set("command", command_echo("embed", args));
  report.json.set("input", input_block(path, input.bytes));
  report.json.set("tolerances", tolerance_block(tol));
  report.json.set("warnings", JsonValue::array());

  if (!input.valid()) {
    report.json.set("results", JsonValue::object()
                                   .set("valid", JsonValue::boolean(false))
                                   .set("violations", violations_json(input.violations)));
    report.summary = "input is not a metric space; see violations\n";
    return emit_report(report, flags, 2);
  }

  const auto& space = input.pointed.space;
  JsonValue results = JsonValue::object();

  auto m_class = is_in_M_class(space, tol);
  results.set("additive_class", JsonValue::boolean(m_class.holds));

  auto emb = embed_into_line(space, tol);
  JsonValue ej = JsonValue::object();
  ej.set("success", JsonValue::boolean(emb.success));
  if (emb.success) {
    JsonValue coords = JsonValue::object();
    for (std::size_t i = 0; i < space.size(); ++i)
      coords.set(space.label(i), JsonValue::number(emb.coordinates[i]));
    ej.set("coordinates", std::move(coords));
    ej.set("max_error", JsonValue::number(emb.max_error));
  } else if (emb.failure_pair) {
    ej.set("failure_pair", JsonValue::array()
                               .push(JsonValue::string(space.label(emb.failure_pair->first)))
                               .push(JsonValue::string(space.label(emb.failure_pair->second))));
  }
  results.set("line_embedding", std::move(ej));

  std::ostringstream sum;
  sum << (m_class.holds ? "additive-class member" : "not in the additive class") << "; "
      << (emb.success ? "line-embeddable" : "not line-embeddable");

  if (space.size() == 4) {
    auto params = detect_pseudo_linear_quadruple(space, tol);
    if (params) {
      JsonValue pj = JsonValue::object();
      pj.set("s", JsonValue::number(params->s));
      pj.set("t", JsonValue::number(params->t));
      JsonValue labeling = JsonValue::array();
      for (std::size_t i : params->labeling) labeling.push(JsonValue::string(space.label(i)));
      pj.set("labeling", std::move(labeling));
      results.set("pseudo_linear_quadruple", std::move(pj));
      sum << "; pseudo-linear quadruple (s, t) = (" << params->s << ", " << params->t << ")";
    } else {
      results.set("pseudo_linear_quadruple", JsonValue::null());
    }
  }
  sum << "\n";

  report.json.set("results", std::move(results));
  report.summary = sum.str();
  return emit_report(report, flags, 0);
}

// -------------------------------------------------------------------------
// generate

int cmd_generate(const std::vector<std::string>& args, const std::string& path,
                 const CommonFlags& flags, const std::string& inline_spec, bool family) {
  const auto tol = flags.tolerances();
  const std::string bytes = inline_spec.empty() ? io::read_file(path) : inline_spec;
  auto spec = io::parse_generator_spec(nlohmann::json::parse(bytes));

  Report report;
  report.json.set("command", command_echo("generate", args));
  report.json.set("input", input_block(inline_spec.empty() ? path : "(inline)", bytes));
  report.json.set("tolerances", tolerance_block(tol));
  report.json.set("warnings", JsonValue::array());

  // For generate, --out receives the artifact itself (a matrix or family
  // file); the report stays on stdout.
  JsonValue artifact = JsonValue::object();
  JsonValue results = JsonValue::object();
  std::ostringstream sum;
  if (family) {
    artifact = io::canonical_family_json(spec);
    results.set("family", io::canonical_family_json(spec));
    sum << "canonical family for the generator spec\n";
  } else {
    auto pointed = io::materialize(spec, tol);
    artifact = io::space_to_json(pointed.space, pointed.base);
    results.set("space", io::space_to_json(pointed.space, pointed.base));
    sum << "generated space with " << pointed.space.size() << " points\n";
  }
  report.json.set("results", std::move(results));
  report.summary = sum.str();
  if (!flags.out.empty()) io::write_file(flags.out, artifact.dump(2));
  CommonFlags stdout_only = flags;
  stdout_only.out.clear();
  return emit_report(report, stdout_only, 0);
}

// -------------------------------------------------------------------------
// snowflake

int cmd_snowflake(const std::vector<std::string>& args, const std::string& path,
                  const CommonFlags& flags, bool points_mode, MetricKind points_norm,
                  double exponent) {
  const auto tol = flags.tolerances();
  LoadedInput input = load_input(path, "", points_mode, points_norm, tol);

  Report report;
  report.json.set("command", command_echo("snowflake", args));
  report.json.set("input", input_block(path, input.bytes));
  report.json.set("tolerances", tolerance_block(tol));
  report.json.set("warnings", JsonValue::array());

  if (!input.valid()) {
    report.json.set("results", JsonValue::object()
                                   .set("valid", JsonValue::boolean(false))
                                   .set("violations", violations_json(input.violations)));
    report.summary = "input is not a metric space; see violations\n";
    return emit_report(report, flags, 2);
  }

  auto flaked = snowflake(input.pointed.space, exponent, tol);
  JsonValue results = JsonValue::object();
  results.set("exponent", JsonValue::number(exponent));
  results.set("success", JsonValue::boolean(flaked.ok()));
  std::ostringstream sum;
  int exit_code = 0;
  if (flaked.ok()) {
    results.set("space",
                io::space_to_json(*flaked.space, input.has_base
                                                     ? std::optional<std::size_t>(input.pointed.base)
                                                     : std::nullopt));
    sum << "snowflake with exponent " << exponent << " succeeded\n";
  } else {
    const auto& space = input.pointed.space;
    results.set("violating_triple",
                JsonValue::array()
                    .push(JsonValue::string(space.label((*flaked.violation)[0])))
                    .push(JsonValue::string(space.label((*flaked.violation)[1])))
                    .push(JsonValue::string(space.label((*flaked.violation)[2]))));
    sum << "snowflake with exponent " << exponent << " breaks the triangle inequality\n";
    exit_code = 2;
  }
  report.json.set("results", std::move(results));
  report.summary = sum.str();
  return emit_report(report, flags, exit_code);
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);

  CLI::App app{"metric-geometry analysis of finite spaces and scaled-sequence families"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string path;
  bool points_mode = false;
  std::string points_norm_text = "euclidean";
  std::string base_label;
  std::string mode;
  double s1 = 0.0;
  std::string schedule_text;
  int steps = 8;
  std::size_t budget = 20000;
  std::string domain_text;
  std::string window_text;
  std::string refine_text;
  std::string snapshot_out;
  std::string inline_spec;
  bool family_out = false;
  double exponent = 0.5;

  auto add_input_flags = [&](CLI::App* cmd, bool with_base) {
    cmd->add_option("input", path, "input file (.json matrix/generator, .csv matrix or points)")
        ->required();
    cmd->add_flag("--points", points_mode, "treat CSV input as label,x,y point rows");
    cmd->add_option("--metric", points_norm_text, "norm for point inputs: euclidean or linf")
        ->check(CLI::IsMember({"euclidean", "linf"}));
    if (with_base) cmd->add_option("--base", base_label, "label of the marked point");
  };

  auto* validate = app.add_subcommand("validate", "check the metric axioms");
  add_input_flags(validate, false);
  add_common_flags(validate, flags);

  auto* analyze = app.add_subcommand("analyze", "exponents, class membership, limit estimates");
  add_input_flags(analyze, true);
  analyze->add_option("--mode", mode, "limit quantity: ultra, s1, F or Phi")
      ->check(CLI::IsMember({"ultra", "s1", "F", "Phi"}));
  analyze->add_option("--s1", s1, "exponent for the s1 criterion");
  analyze->add_option("--schedule", schedule_text,
                      "radii r1,r2,... or 'auto' (default: diameter/2 halved per step)");
  analyze->add_option("--steps", steps, "schedule length when derived automatically");
  analyze->add_option("--budget", budget, "max tuples per radius before sampling kicks in");
  analyze->add_option("--domain", domain_text, "triple domain: all or plus")
      ->check(CLI::IsMember({"all", "plus"}));
  add_common_flags(analyze, flags);

  auto* pretangent = app.add_subcommand("pretangent", "scaled limits, stability, identification");
  pretangent->add_option("input", path, "family description (.json)")->required();
  pretangent->add_option("--window", window_text,
                         "evaluation indices n1,n2,... (default 8,16,32,64)");
  pretangent->add_option("--refine", refine_text, "re-evaluate along this subsequence");
  pretangent->add_option("--snapshot-out", snapshot_out, "also write the snapshot matrix here");
  add_common_flags(pretangent, flags);

  auto* embed = app.add_subcommand("embed", "isometric line embedding and quadruple detection");
  add_input_flags(embed, false);
  add_common_flags(embed, flags);

  auto* generate = app.add_subcommand("generate", "materialize a generator spec");
  generate->add_option("input", path, "generator spec (.json)");
  generate->add_option("--spec", inline_spec, "inline generator spec JSON");
  generate->add_flag("--family", family_out, "emit the canonical family instead of the matrix");
  add_common_flags(generate, flags);

  auto* snowflake_cmd = app.add_subcommand("snowflake", "apply a power transform to the metric");
  add_input_flags(snowflake_cmd, false);
  snowflake_cmd->add_option("--exponent", exponent, "power applied to every distance")->required();
  add_common_flags(snowflake_cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  const MetricKind points_norm =
      points_norm_text == "linf" ? MetricKind::linf : MetricKind::euclidean;

  try {
    if (validate->parsed()) return cmd_validate(args, path, flags, points_mode, points_norm);
    if (analyze->parsed())
      return cmd_analyze(args, path, flags, points_mode, points_norm, base_label, mode, s1,
                         schedule_text, steps, budget, domain_text);
    if (pretangent->parsed())
      return cmd_pretangent(args, path, flags, window_text, refine_text, snapshot_out);
    if (embed->parsed()) return cmd_embed(args, path, flags, points_mode, points_norm);
    if (generate->parsed()) {
      if (path.empty() && inline_spec.empty()) {
        std::cerr << "generate: need a spec file or --spec\n";
        return 1;
      }
      return cmd_generate(args, path, flags, inline_spec, family_out);
    }
    if (snowflake_cmd->parsed())
      return cmd_snowflake(args, path, flags, points_mode, points_norm, exponent);
  } catch (const GeneratorError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const EstimationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
