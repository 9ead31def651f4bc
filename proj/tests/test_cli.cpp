#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#ifndef METGEO_CLI_PATH
#error "METGEO_CLI_PATH must point at the built binary"
#endif
#ifndef METGEO_TEST_TMPDIR
#error "METGEO_TEST_TMPDIR must point at a writable directory"
#endif

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& cli_args) {
  const std::string command = std::string(METGEO_CLI_PATH) + " " + cli_args + " 2>/dev/null";
  RunResult result;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) result.out.append(buf.data(), got);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string tmp_path(const std::string& name) {
  return std::string(METGEO_TEST_TMPDIR) + "/" + name;
}

void write(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

}  // namespace

TEST_CASE("cli validate") {
  SECTION("valid matrix exits 0") {
    const auto path = tmp_path("valid.json");
    write(path, R"({"labels":["a","b"],"dist":[[0,1],[1,0]]})");
    auto r = run_cli("validate " + path);
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["results"]["valid"] == true);
    CHECK(j["results"]["points"] == 2);
  }
  SECTION("asymmetric matrix exits 2 with the violation listed") {
    const auto path = tmp_path("asym.json");
    write(path, R"({"labels":["a","b"],"dist":[[0,1],[2,0]]})");
    auto r = run_cli("validate " + path);
    CHECK(r.exit_code == 2);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["results"]["valid"] == false);
    CHECK(j["results"]["violations"][0]["kind"] == "asymmetry");
  }
  SECTION("malformed file exits 1") {
    const auto path = tmp_path("broken.json");
    write(path, "{not json");
    CHECK(run_cli("validate " + path).exit_code == 1);
  }
  SECTION("points CSV input") {
    const auto path = tmp_path("pts.csv");
    write(path, "label,x,y\np,0,0\nq,3,4\n");
    auto r = run_cli("validate " + path + " --points --metric euclidean");
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["results"]["diameter"] == 5.0);
  }
}

TEST_CASE("cli analyze") {
  SECTION("ultrametric generator input diverges in ultra mode") {
    const auto path = tmp_path("ultra.json");
    write(path, R"({"kind":"random_ultrametric","n":16,"seed":5})");
    auto r = run_cli("analyze " + path + " --mode ultra --schedule auto --steps 4");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["results"]["betweenness_exponent"]["value"] == "inf");
    CHECK(j["results"]["ultrametric"]["holds"] == true);
    CHECK(j["results"]["limit_estimate"]["verdict"] == "diverges");
    CHECK(j["warnings"].size() == 1);
  }
  SECTION("line sample is bounded in ultra mode") {
    const auto path = tmp_path("line.json");
    write(path, R"({"kind":"line_sample","n":200,"range":1.0,"seed":2024})");
    auto r = run_cli("analyze " + path +
                     " --mode ultra --schedule 0.5,0.35,0.245,0.1715,0.12 --budget 300000");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["results"]["betweenness_exponent"]["value"] == 1.0);
    CHECK(j["results"]["additive_class"]["holds"] == true);
    CHECK(j["results"]["limit_estimate"]["verdict"] == "bounded");
  }
  SECTION("s1 mode at the line exponent diverges") {
    const auto path = tmp_path("line2.json");
    write(path, R"({"kind":"line_sample","n":60,"range":1.0,"seed":7})");
    auto r = run_cli("analyze " + path + " --mode s1 --s1 1 --schedule 0.5,0.4,0.3");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["results"]["limit_estimate"]["verdict"] == "diverges");
  }
  SECTION("limit mode without a base point is a usage error") {
    const auto path = tmp_path("nobase.json");
    write(path, R"({"labels":["a","b","c"],"dist":[[0,1,2],[1,0,1],[2,1,0]]})");
    CHECK(run_cli("analyze " + path + " --mode ultra").exit_code == 1);
  }
  SECTION("reports are byte-identical across runs") {
    const auto path = tmp_path("repro.json");
    write(path, R"({"kind":"line_sample","n":40,"range":1.0,"seed":9})");
    const std::string cmd =
        "analyze " + path + " --mode ultra --schedule auto --steps 4 --budget 500 --seed 11";
    auto a = run_cli(cmd);
    auto b = run_cli(cmd);
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);
  }
}

TEST_CASE("cli pretangent") {
  SECTION("canonical shrinking-scale family gives a two-class snapshot") {
    const auto spec = tmp_path("p29spec.json");
    write(spec, R"({"kind":"scale_separated_line","sequence":{"kind":"power_square","q":0.5},"depth":6})");
    const auto fam = tmp_path("p29fam.json");
    auto gen = run_cli("generate " + spec + " --family --out " + fam);
    REQUIRE(gen.exit_code == 0);

    auto r = run_cli("pretangent " + fam + " --window 12,18,24,30 --refine 14,20,26,31");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["results"]["self_stable"] == true);
    CHECK(j["results"]["snapshot"]["labels"].size() == 2);
    CHECK(j["results"]["refinement"]["preserved"] == true);
    CHECK(j["warnings"].size() == 1);
  }
  SECTION("quadruple family gives a four-class snapshot and an export") {
    const auto spec = tmp_path("ex37spec.json");
    write(spec,
          R"({"kind":"shrinking_quadruples","s":1,"t":2,"scales":{"kind":"power_square","q":0.25},"depth":4})");
    const auto fam = tmp_path("ex37fam.json");
    REQUIRE(run_cli("generate " + spec + " --family --out " + fam).exit_code == 0);

    const auto snap = tmp_path("ex37snap.json");
    auto r = run_cli("pretangent " + fam + " --window 4,8,16 --snapshot-out " + snap);
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["results"]["snapshot"]["labels"].size() == 4);

    auto snapshot = nlohmann::json::parse(std::ifstream(snap));
    CHECK(snapshot["dist"].size() == 4);
    CHECK(snapshot["provenance"]["classes"].size() == 4);

    // the exported snapshot is itself a valid embed input
    auto embed = run_cli("embed " + snap);
    REQUIRE(embed.exit_code == 0);
    auto ej = nlohmann::json::parse(embed.out);
    CHECK(ej["results"]["additive_class"] == true);
    CHECK(ej["results"]["line_embedding"]["success"] == false);
    CHECK(ej["results"]["pseudo_linear_quadruple"]["s"] == 1.0);
    CHECK(ej["results"]["pseudo_linear_quadruple"]["t"] == 2.0);
  }
  SECTION("non-convergent family exits 2 naming the pair") {
    nlohmann::json fam;
    fam["host"] = {{"kind", "line"}};
    fam["normalizer"] = {{"kind", "geometric"}, {"q", 0.5}};
    nlohmann::json seq_p = {{"name", "p"}, {"kind", "constant"}, {"point", 0.0}};
    nlohmann::json seq_mix = {{"name", "mix"}, {"kind", "explicit"}};
    // factor cycles with period 3 so the default window 8,16,32,64 sees it move
    for (int n = 1; n <= 64; ++n)
      seq_mix["points"].push_back((1.0 + n % 3) * std::pow(0.5, n));
    fam["sequences"] = {seq_p, seq_mix};
    const auto path = tmp_path("oscfam.json");
    write(path, fam.dump());

    auto r = run_cli("pretangent " + path);
    CHECK(r.exit_code == 2);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["results"]["self_stable"] == false);
    CHECK(j["results"]["identification_refused"]["pair"][0] == "p");
    CHECK(j["results"]["identification_refused"]["pair"][1] == "mix");
  }
}

TEST_CASE("cli embed") {
  SECTION("collinear matrix gets coordinates") {
    const auto path = tmp_path("coll.json");
    write(path, R"({"labels":["a","b","c"],"dist":[[0,1,3],[1,0,2],[3,2,0]]})");
    auto r = run_cli("embed " + path);
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["results"]["line_embedding"]["success"] == true);
    CHECK(j["results"]["line_embedding"]["coordinates"]["b"] == 1.0);
  }
  SECTION("equilateral is not in the additive class") {
    const auto path = tmp_path("equi.json");
    write(path, R"({"labels":["a","b","c"],"dist":[[0,1,1],[1,0,1],[1,1,0]]})");
    auto r = run_cli("embed " + path);
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["results"]["additive_class"] == false);
    CHECK(j["results"]["line_embedding"]["success"] == false);
  }
}

TEST_CASE("cli snowflake") {
  SECTION("concave exponent writes the transformed space") {
    const auto path = tmp_path("sf.json");
    write(path, R"({"labels":["a","b","c"],"dist":[[0,1,2],[1,0,1],[2,1,0]]})");
    auto r = run_cli("snowflake " + path + " --exponent 0.5");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["results"]["success"] == true);
    CHECK(j["results"]["space"]["dist"][0][1] == 1.0);
  }
  SECTION("expanding exponent exits 2 with the violating triple") {
    const auto path = tmp_path("sf2.json");
    write(path, R"({"labels":["a","b","c"],"dist":[[0,1,2],[1,0,1],[2,1,0]]})");
    auto r = run_cli("snowflake " + path + " --exponent 2");
    CHECK(r.exit_code == 2);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["results"]["success"] == false);
    CHECK(j["results"]["violating_triple"].size() == 3);
  }
}
