#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "metgeo/generators.hpp"
#include "metgeo/line_embedding.hpp"
#include "metgeo/metric_space.hpp"
#include "metgeo/pretangent.hpp"
#include "metgeo/triples.hpp"

using namespace metgeo;

namespace {

// Window chosen so 2^(-n^2) style members stay inside double range: the
// shifted member b_{n+1} needs (n+1)^2 <= 1074.
const std::vector<std::size_t> kDeepWindow = {12, 18, 24, 30};

template <class Host>
double worst_triangle_slack(const StableFamily<Host>& family) {
  double worst = 0.0;
  const std::size_t n = family.members.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        const double lhs = family.limit(i, j).value;
        const double rhs = family.limit(i, k).value + family.limit(k, j).value;
        worst = std::max(worst, lhs - rhs);
      }
  return worst;
}

StableFamily<LineHost> scale_separated_family(const std::vector<std::size_t>& window = kDeepWindow) {
  auto b = SequenceRule::power_square(0.5);
  std::vector<FamilyMember<LineHost>> members;
  members.push_back(FamilyMember<LineHost>::constant("p", 0.0));
  members.push_back(
      FamilyMember<LineHost>::from_path("b", [b](std::size_t n) { return b.at(n); }));
  members.push_back(
      FamilyMember<LineHost>::from_path("b+1", [b](std::size_t n) { return b.at(n + 1); }));
  return mutual_stability_matrix(LineHost{}, std::move(members), b, window);
}

}  // namespace

TEST_CASE("sequence rules") {
  SECTION("geometric and power-square evaluation") {
    auto g = SequenceRule::geometric(0.5, 2.0);
    CHECK(g.at(3) == 0.25);
    auto p = SequenceRule::power_square(0.5);
    CHECK(p.at(3) == std::pow(2.0, -9.0));
  }
  SECTION("inverse factorial") {
    auto f = SequenceRule::inverse_factorial();
    CHECK(f.at(4) == 1.0 / 24.0);
  }
  SECTION("explicit lists are window-bounded") {
    auto e = SequenceRule::explicit_list({1.0, 0.5});
    CHECK(e.at(2) == 0.5);
    CHECK_THROWS_AS(e.at(3), WindowError);
  }
  SECTION("normalizer must decay over the window") {
    CHECK_THROWS_AS(
        validate_normalizer(SequenceRule::geometric(0.9), {2, 4, 8}, ToleranceConfig{}),
        std::invalid_argument);
    CHECK_NOTHROW(
        validate_normalizer(SequenceRule::power_square(0.5), kDeepWindow, ToleranceConfig{}));
  }
}

TEST_CASE("scaled_distance_limit") {
  ToleranceConfig tol;

  SECTION("scaled sequences over a norm host are exact") {
    PlaneHost host{MetricKind::linf};
    auto r = SequenceRule::power_square(0.25);
    auto x1 = FamilyMember<PlaneHost>::scaled("x1", {1.0, 1.0});
    auto x2 = FamilyMember<PlaneHost>::scaled("x2", {3.0, -1.0});
    auto l = scaled_distance_limit(host, x1, x2, r, {4, 8, 16}, tol);
    CHECK(l.status == LimitStatus::converged);
    CHECK(l.exact);
    CHECK(l.value == 2.0);  // l-inf distance between the seeds
  }

  SECTION("the base sequence against itself as normalizer gives one") {
    auto fam = scale_separated_family();
    CHECK(fam.limit(0, 1).status == LimitStatus::converged);
    CHECK_THAT(fam.limit(0, 1).value, Catch::Matchers::WithinAbs(1.0, 1e-9));
  }

  SECTION("the shifted sequence collapses to zero") {
    auto fam = scale_separated_family();
    CHECK(fam.limit(0, 2).status == LimitStatus::converged);
    CHECK_THAT(fam.limit(0, 2).value, Catch::Matchers::WithinAbs(0.0, 1e-9));
  }

  SECTION("window overruns of explicit sequences are window errors") {
    LineHost host;
    auto x = FamilyMember<LineHost>::from_list("x", {1.0, 0.5, 0.25});
    auto p = FamilyMember<LineHost>::constant("p", 0.0);
    auto r = SequenceRule::geometric(0.5);
    CHECK_THROWS_AS(scaled_distance_limit(host, x, p, r, {2, 4, 8}, tol), WindowError);
  }
}

TEST_CASE("mutual_stability_matrix") {
  ToleranceConfig tol;

  SECTION("shrinking quadruple copies recover the seed distances") {
    auto gen = gen_shrinking_quadruples(1.0, 2.0, SequenceRule::power_square(0.25), 4);
    std::vector<FamilyMember<PlaneHost>> members = gen.canonical_family;
    auto fam = mutual_stability_matrix(gen.host, members, gen.scales, {4, 8, 16}, tol);
    REQUIRE(fam.self_stable());
    // the limit matrix carries the pattern {s, t, s+t} = {1, 2, 3}
    CHECK(fam.limit(0, 1).value == 1.0);
    CHECK(fam.limit(2, 3).value == 1.0);
    CHECK(fam.limit(1, 2).value == 2.0);
    CHECK(fam.limit(0, 3).value == 2.0);
    CHECK(fam.limit(0, 2).value == 3.0);
    CHECK(fam.limit(1, 3).value == 3.0);
    CHECK(worst_triangle_slack(fam) <= tol.rel_eq);
  }

  SECTION("the lone constant sequence is trivially self-stable") {
    LineHost host;
    std::vector<FamilyMember<LineHost>> members{FamilyMember<LineHost>::constant("p", 0.0)};
    auto fam = mutual_stability_matrix(host, std::move(members), SequenceRule::geometric(0.5),
                                       geometric_window(), tol);
    CHECK(fam.self_stable());
  }

  SECTION("an interleaved pair oscillates at finite windows") {
    auto b = SequenceRule::power_square(0.5);
    std::vector<FamilyMember<LineHost>> members;
    members.push_back(
        FamilyMember<LineHost>::from_path("b", [b](std::size_t n) { return b.at(n); }));
    members.push_back(FamilyMember<LineHost>::from_path("mix", [b](std::size_t n) {
      return n % 2 == 1 ? b.at(n) : b.at(n) / static_cast<double>(n);
    }));
    auto fam = mutual_stability_matrix(LineHost{}, std::move(members), b, {4, 8, 16, 32}, tol);
    CHECK_FALSE(fam.self_stable());
    CHECK(fam.limit(0, 1).status == LimitStatus::oscillating);
  }

  SECTION("triangle inequality of the limit values on converged families") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> u(0.5, 3.0);
    for (int rep = 0; rep < 10; ++rep) {
      PlaneHost host{MetricKind::euclidean};
      std::vector<FamilyMember<PlaneHost>> members;
      members.push_back(FamilyMember<PlaneHost>::scaled("p", {0.0, 0.0}));
      for (int i = 0; i < 4; ++i)
        members.push_back(FamilyMember<PlaneHost>::scaled("x" + std::to_string(i),
                                                          {u(rng), u(rng)}));
      auto fam = mutual_stability_matrix(host, std::move(members), SequenceRule::geometric(0.5),
                                         geometric_window(), tol);
      REQUIRE(fam.self_stable());
      CHECK(worst_triangle_slack(fam) <= tol.rel_eq);
    }
  }
}

TEST_CASE("metric_identification") {
  ToleranceConfig tol;

  SECTION("quadruple family identifies to four classes") {
    auto gen = gen_shrinking_quadruples(1.0, 2.0, SequenceRule::power_square(0.25), 4);
    auto fam = mutual_stability_matrix(gen.host, gen.canonical_family, gen.scales, {4, 8, 16}, tol);
    auto result = metric_identification(fam, tol);
    REQUIRE(result.ok());
    CHECK(result.snapshot->classes.size() == 4);
    CHECK(result.snapshot->quotient.size() == 4);
    // quotient is isometric to the (1,2) pseudo-linear quadruple
    auto params = detect_pseudo_linear_quadruple(result.snapshot->quotient, tol);
    REQUIRE(params.has_value());
    CHECK_THAT(params->s, Catch::Matchers::WithinRel(1.0, 1e-12));
    CHECK_THAT(params->t, Catch::Matchers::WithinRel(2.0, 1e-12));
  }

  SECTION("scale-separated line family collapses to two classes") {
    auto fam = scale_separated_family();
    auto result = metric_identification(fam, tol);
    REQUIRE(result.ok());
    CHECK(result.snapshot->classes.size() == 2);
    // the shifted member lands in the class of the constant sequence
    bool merged = false;
    for (const auto& cls : result.snapshot->classes)
      if (cls.size() == 2) merged = true;
    CHECK(merged);
  }

  SECTION("the singleton family has one class") {
    LineHost host;
    std::vector<FamilyMember<LineHost>> members{FamilyMember<LineHost>::constant("p", 0.0)};
    auto fam = mutual_stability_matrix(host, std::move(members), SequenceRule::geometric(0.5),
                                       geometric_window(), tol);
    auto result = metric_identification(fam, tol);
    REQUIRE(result.ok());
    CHECK(result.snapshot->classes.size() == 1);
  }

  SECTION("non-converged entries refuse identification with the pair") {
    auto b = SequenceRule::power_square(0.5);
    std::vector<FamilyMember<LineHost>> members;
    members.push_back(FamilyMember<LineHost>::constant("p", 0.0));
    members.push_back(FamilyMember<LineHost>::from_path("mix", [b](std::size_t n) {
      return n % 2 == 1 ? b.at(n) : b.at(n) / static_cast<double>(n);
    }));
    auto fam = mutual_stability_matrix(LineHost{}, std::move(members), b, {4, 8, 16, 32}, tol);
    auto result = metric_identification(fam, tol);
    REQUIRE_FALSE(result.ok());
    REQUIRE(result.offending_pair.has_value());
    CHECK(result.offending_pair->first == 0);
    CHECK(result.offending_pair->second == 1);
  }

  SECTION("quotients over ultrametric hosts are ultrametric") {
    std::mt19937_64 rng(991);
    std::uniform_real_distribution<double> lam(0.3, 0.7);
    for (int rep = 0; rep < 8; ++rep) {
      // chain hierarchy with levels lambda^k; sequences descend toward p
      const double lambda = lam(rng);
      const std::size_t levels = 140;
      std::vector<std::vector<double>> dist(levels + 1,
                                            std::vector<double>(levels + 1, 0.0));
      auto level_height = [&](std::size_t k) { return std::pow(lambda, static_cast<double>(k)); };
      for (std::size_t i = 0; i <= levels; ++i)
        for (std::size_t j = 0; j <= levels; ++j)
          if (i != j) dist[i][j] = level_height(std::min(i, j));
      auto v = validate_metric(dist);
      REQUIRE(v.ok());
      REQUIRE(is_ultrametric(*v.space).holds);

      MatrixHost host{*v.space};
      // point index = depth along the chain; index `levels` plays p
      std::uniform_int_distribution<std::size_t> offset(0, 3);
      const std::size_t shift_a = offset(rng), shift_b = offset(rng) + 4;
      std::vector<FamilyMember<MatrixHost>> members;
      members.push_back(FamilyMember<MatrixHost>::constant("p", levels));
      members.push_back(FamilyMember<MatrixHost>::from_path(
          "a", [shift_a](std::size_t n) { return std::min<std::size_t>(n + shift_a, 139); }));
      members.push_back(FamilyMember<MatrixHost>::from_path(
          "b", [shift_b](std::size_t n) { return std::min<std::size_t>(n + shift_b, 139); }));
      auto norm = SequenceRule::from_function(
          [lambda](std::size_t n) { return std::pow(lambda, static_cast<double>(n)); },
          "lambda^n");
      auto fam = mutual_stability_matrix(host, std::move(members), norm, {8, 32, 128}, tol);
      REQUIRE(fam.self_stable());
      auto result = metric_identification(fam, tol);
      REQUIRE(result.ok());
      CHECK(is_ultrametric(result.snapshot->quotient, tol).holds);
    }
  }
}

TEST_CASE("subsequence_refinement") {
  ToleranceConfig tol;

  SECTION("constant-ratio families are preserved under any subsequence") {
    auto gen = gen_shrinking_quadruples(1.0, 2.0, SequenceRule::power_square(0.25), 4);
    auto fam = mutual_stability_matrix(gen.host, gen.canonical_family, gen.scales, {4, 8, 16}, tol);
    auto even = subsequence_refinement(fam, {4, 8, 12, 16}, tol);
    CHECK(even.preserved);
    auto identity = subsequence_refinement(fam, fam.window, tol);
    CHECK(identity.preserved);
  }

  SECTION("preserved on the scale-separated line family") {
    auto fam = scale_separated_family();
    auto report = subsequence_refinement(fam, {14, 20, 26, 31}, tol);
    CHECK(report.preserved);
  }

  SECTION("an oscillating pair becomes comparable along the settling subsequence") {
    auto b = SequenceRule::power_square(0.5);
    std::vector<FamilyMember<LineHost>> members;
    members.push_back(
        FamilyMember<LineHost>::from_path("b", [b](std::size_t n) { return b.at(n); }));
    members.push_back(FamilyMember<LineHost>::from_path("mix", [b](std::size_t n) {
      return n % 2 == 1 ? b.at(n) : b.at(n) / static_cast<double>(n);
    }));
    auto fam = mutual_stability_matrix(LineHost{}, std::move(members), b, {4, 8, 16, 32}, tol);
    REQUIRE(fam.limit(0, 1).status == LimitStatus::oscillating);

    // odd indices pick the branch where both sequences coincide
    auto report = subsequence_refinement(fam, {5, 9, 17, 31}, tol);
    REQUIRE(report.entries.size() == 1);
    const auto& entry = report.entries.front();
    CHECK(entry.refined.status == LimitStatus::converged);
    CHECK_THAT(entry.refined.value, Catch::Matchers::WithinAbs(0.0, 1e-9));
    CHECK_FALSE(entry.comparable);  // no original limit to compare against
    CHECK(report.preserved);        // only converged originals can be violated
  }

  SECTION("non-increasing index lists are parameter errors") {
    auto fam = scale_separated_family();
    CHECK_THROWS_AS(subsequence_refinement(fam, {8, 8, 16}, tol), std::invalid_argument);
    CHECK_THROWS_AS(subsequence_refinement(fam, {}, tol), std::invalid_argument);
  }
}

TEST_CASE("check_power_sum_identity") {
  ToleranceConfig tol;

  SECTION("snowflaked line family satisfies the exponent-two identity") {
    // host: the real line with metric |x-y|^(1/2); scaled copies of collinear
    // seeds with normalizer sqrt(r_n) give a quotient carrying d^(1/2)
    PowerLineHost host{0.5};
    const std::vector<double> seeds = {0.0, 1.0, 2.0, 4.0, 7.0};
    std::vector<FamilyMember<PowerLineHost>> members;
    auto scales = SequenceRule::geometric(0.25);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const double seed = seeds[i];
      members.push_back(FamilyMember<PowerLineHost>::from_path(
          "x" + std::to_string(i),
          [seed, scales](std::size_t n) { return scales.at(n) * seed; }));
    }
    auto norm = SequenceRule::geometric(0.5);  // sqrt of the 0.25 scale
    auto fam = mutual_stability_matrix(host, std::move(members), norm, {8, 16, 40}, tol);
    REQUIRE(fam.self_stable());
    auto result = metric_identification(fam, tol);
    REQUIRE(result.ok());
    REQUIRE(result.snapshot->quotient.size() == seeds.size());

    auto check = check_power_sum_identity(*result.snapshot, 2.0, tol);
    CHECK(check.holds);
    CHECK(check.worst_residual <= 1e-9);
  }

  SECTION("two-point snapshots are vacuous") {
    auto fam = scale_separated_family();
    auto result = metric_identification(fam, tol);
    REQUIRE(result.ok());
    for (double s0 : {1.0, 2.0, kInf}) {
      auto check = check_power_sum_identity(*result.snapshot, s0, tol);
      CHECK(check.holds);
      CHECK(check.worst_residual == 0.0);
    }
  }

  SECTION("additive quadruple satisfies the exponent-one identity") {
    auto gen = gen_shrinking_quadruples(1.0, 2.0, SequenceRule::power_square(0.25), 4);
    auto fam = mutual_stability_matrix(gen.host, gen.canonical_family, gen.scales, {4, 8, 16}, tol);
    auto result = metric_identification(fam, tol);
    REQUIRE(result.ok());
    CHECK(check_power_sum_identity(*result.snapshot, 1.0, tol).holds);
  }

  SECTION("ultrametric quotient satisfies the max reading") {
    auto v = validate_metric({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
    CHECK(check_power_sum_identity(*v.space, kInf, tol).holds);
  }

  SECTION("invalid exponent is a parameter error") {
    auto v = validate_metric({{0, 1}, {1, 0}});
    CHECK_THROWS_AS(check_power_sum_identity(*v.space, 0.5, tol), std::invalid_argument);
  }
}
