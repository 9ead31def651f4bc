#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "metgeo/diagnostics.hpp"
#include "metgeo/generators.hpp"
#include "metgeo/line_embedding.hpp"
#include "metgeo/metric_space.hpp"
#include "metgeo/pretangent.hpp"
#include "metgeo/triples.hpp"

using namespace metgeo;

TEST_CASE("gen_scale_separated_line") {
  ToleranceConfig tol;

  SECTION("canonical rate gives the truncated space") {
    auto gen = gen_scale_separated_line(SequenceRule::power_square(0.5), 6);
    CHECK(gen.pointed.space.size() == 7);
    CHECK(gen.pointed.space.label(gen.pointed.base) == "p");
    CHECK(gen.pointed.space.dist(0, 1) == 0.5);
    CHECK(validate_metric(gen.pointed.space.rows(), tol).ok());
  }

  SECTION("plain geometric decay is rejected") {
    CHECK_THROWS_AS(gen_scale_separated_line(SequenceRule::geometric(0.5), 4), GeneratorError);
  }

  SECTION("inverse factorial decay is accepted") {
    auto gen = gen_scale_separated_line(SequenceRule::inverse_factorial(), 5);
    CHECK(gen.pointed.space.size() == 6);
    CHECK(validate_metric(gen.pointed.space.rows(), tol).ok());
  }

  SECTION("consecutive scale triples have exploding spread") {
    const std::size_t depth = 6;
    auto gen = gen_scale_separated_line(SequenceRule::power_square(0.5), depth);
    const auto& space = gen.pointed.space;
    double prev_psi = 0.0;
    for (std::size_t n = 1; n + 1 <= depth; ++n) {
      auto p = space.index_of("p");
      auto bn = space.index_of("b" + std::to_string(n));
      auto bn1 = space.index_of("b" + std::to_string(n + 1));
      REQUIRE((p && bn && bn1));
      const double psi = psi_value(space, *p, *bn1, *bn);
      CHECK(psi > prev_psi);
      prev_psi = psi;
    }
    CHECK(prev_psi > 1000.0);  // b_5/b_6 = 2^11
  }
}

TEST_CASE("gen_shrinking_quadruples") {
  ToleranceConfig tol;

  SECTION("level quadruples carry the scaled pattern") {
    auto gen = gen_shrinking_quadruples(1.0, 2.0, SequenceRule::power_square(0.25), 4);
    // 3 non-origin points per level plus the shared origin
    CHECK(gen.pointed.space.size() == 13);
    const auto& space = gen.pointed.space;
    for (std::size_t n = 1; n <= 4; ++n) {
      const double rn = gen.scales.at(n);
      auto p0 = space.index_of("p");
      auto p1 = space.index_of("r" + std::to_string(n) + "p1");
      auto p2 = space.index_of("r" + std::to_string(n) + "p2");
      auto p3 = space.index_of("r" + std::to_string(n) + "p3");
      REQUIRE((p0 && p1 && p2 && p3));
      CHECK_THAT(space.dist(*p0, *p1), Catch::Matchers::WithinRel(rn * 1.0, 1e-12));
      CHECK_THAT(space.dist(*p1, *p2), Catch::Matchers::WithinRel(rn * 2.0, 1e-12));
      CHECK_THAT(space.dist(*p0, *p2), Catch::Matchers::WithinRel(rn * 3.0, 1e-12));
      CHECK_THAT(space.dist(*p2, *p3), Catch::Matchers::WithinRel(rn * 1.0, 1e-12));
    }
    CHECK(validate_metric(space.rows(), tol).ok());
  }

  SECTION("canonical family identifies to four classes") {
    auto gen = gen_shrinking_quadruples(1.0, 2.0, SequenceRule::power_square(0.25), 4);
    auto fam = mutual_stability_matrix(gen.host, gen.canonical_family, gen.scales, {4, 8, 16}, tol);
    auto result = metric_identification(fam, tol);
    REQUIRE(result.ok());
    CHECK(result.snapshot->quotient.size() == 4);
  }

  SECTION("constant-ratio scales are rejected") {
    CHECK_THROWS_AS(gen_shrinking_quadruples(1.0, 2.0, SequenceRule::geometric(0.5), 4), GeneratorError);
  }
}

TEST_CASE("gen_random_ultrametric") {
  ToleranceConfig tol;

  SECTION("two points") {
    auto space = gen_random_ultrametric(2, 1);
    CHECK(space.size() == 2);
    CHECK(space.dist(0, 1) > 0.0);
    CHECK(is_ultrametric(space, tol).holds);
  }

  SECTION("fixed seed stays ultrametric") {
    auto space = gen_random_ultrametric(8, 42);
    CHECK(is_ultrametric(space, tol).holds);
  }

  SECTION("betweenness exponent is always infinite") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto space = gen_random_ultrametric(6 + seed % 5, seed);
      CHECK(std::isinf(betweenness_exponent(space, tol).value));
      CHECK(validate_metric(space.rows(), tol).ok());
    }
  }

  SECTION("fewer than two points is a parameter error") {
    CHECK_THROWS_AS(gen_random_ultrametric(1, 0), std::invalid_argument);
  }
}

TEST_CASE("gen_line_sample") {
  ToleranceConfig tol;

  SECTION("always additive, embeddable and exponent one") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      auto pointed = gen_line_sample(6, 3.0, seed);
      CHECK(pointed.space.size() == 7);
      CHECK(is_in_M_class(pointed.space, tol).holds);
      auto emb = embed_into_line(pointed.space, tol);
      CHECK(emb.success);
      CHECK(emb.max_error < 1e-12);
      CHECK(betweenness_exponent(pointed.space, tol).value == 1.0);
      CHECK(validate_metric(pointed.space.rows(), tol).ok());
    }
  }

  SECTION("base point is zero") {
    auto pointed = gen_line_sample(5, 1.0, 9);
    CHECK(pointed.space.label(pointed.base) == "p");
    for (std::size_t i = 0; i < pointed.space.size(); ++i)
      if (i != pointed.base) CHECK(pointed.dist_to_base(i) > 0.0);
  }
}

TEST_CASE("snowflaked line samples scale the betweenness exponent") {
  ToleranceConfig tol;
  for (double q : {1.5, 2.0, 3.0}) {
    auto pointed = gen_line_sample(7, 2.0, 11);
    auto flaked = snowflake(pointed.space, 1.0 / q, tol);
    REQUIRE(flaked.ok());
    auto t0 = betweenness_exponent(*flaked.space, tol);
    CHECK_THAT(t0.value, Catch::Matchers::WithinAbs(q, 1e-6));
  }
}
