#include <doctest.h>

#include "support.hpp"

using namespace envnet;
using testsupport::birth_death_two_state;
using testsupport::random_network;

namespace {

const char* kCaseStudy = R"(
[species]
names = S

[environment]
states = lo hi
row lo = -1.0 1.0
row hi = 2.0 -2.0

[reactions]
reaction = 0 -> S : 1.0 1.0
reaction = S -> 0 : 0.5 2.0
)";

}  // namespace

TEST_CASE("case-study model is accepted") {
  ModulatedNetwork net = validate_network(parse_model(kCaseStudy));
  CHECK(net.species_count() == 1);
  CHECK(net.env_count() == 2);
  CHECK(net.burst(0) == 1);
  CHECK(net.production_rate(0, 1) == 1.0);
  CHECK(net.degradation_rate(0, 1) == 2.0);
}

TEST_CASE("bimolecular reactant is rejected with a named violation") {
  const char* text = R"(
[species]
names = S1 S2 S3

[environment]
states = a b
row a = -1 1
row b = 1 -1

[reactions]
reaction = S1 + S2 -> S3 : 1.0 1.0
reaction = S3 -> 0 : 1.0 1.0
)";
  try {
    validate_network(parse_model(text));
    FAIL("expected rejection");
  } catch (const ValidationError& e) {
    bool found = false;
    for (const auto& v : e.violations()) found = found || v.find("bimolecular reactant") != std::string::npos;
    CHECK(found);
  }
}

TEST_CASE("non-conservative generator row is rejected") {
  const char* text = R"(
[species]
names = S

[environment]
states = a b
row a = -1 1.1
row b = 1 -1

[reactions]
reaction = 0 -> S : 1 1
reaction = S -> 0 : 1 1
)";
  try {
    validate_network(parse_model(text));
    FAIL("expected rejection");
  } catch (const ValidationError& e) {
    bool found = false;
    for (const auto& v : e.violations()) found = found || v.find("not conservative") != std::string::npos;
    CHECK(found);
  }
}

TEST_CASE("unknown keys, reducible environments, negative rates all rejected") {
  CHECK_THROWS_AS(parse_model("[species]\nnames = S\nbogus = 1\n[environment]\nstates = a\nrow a = 0\n"
                              "[reactions]\nreaction = 0 -> S : 1"),
                  ValidationError);
  CHECK_THROWS_AS(validate_network(parse_model(
                      "[species]\nnames = S\n[environment]\nstates = a b\nrow a = 0 0\nrow b = 0 0\n"
                      "[reactions]\nreaction = 0 -> S : 1 1\nreaction = S -> 0 : 1 1")),
                  ValidationError);
  CHECK_THROWS_AS(validate_network(parse_model(
                      "[species]\nnames = S\n[environment]\nstates = a b\nrow a = -1 1\nrow b = 1 -1\n"
                      "[reactions]\nreaction = 0 -> S : -1 1\nreaction = S -> 0 : 1 1")),
                  ValidationError);
}

TEST_CASE("modulation assembly: scalar case and gene-style table") {
  ModulatedNetwork net = validate_network(parse_model(kCaseStudy));
  Modulation mod = build_modulation(net);
  CHECK(mod.A[0](0, 0) == doctest::Approx(-0.5));
  CHECK(mod.A[1](0, 0) == doctest::Approx(-2.0));
  CHECK(mod.B[0](0) == doctest::Approx(1.0));

  // Production proportional to the active-copy count, constant degradation.
  const char* gene = R"(
[species]
names = P

[environment]
states = g0 g1
row g0 = -1.0 1.0
row g1 = 2.0 -2.0

[reactions]
reaction = 0 -> P : 0.0 3.0
reaction = P -> 0 : 1.0 1.0
)";
  ModulatedNetwork gnet = validate_network(parse_model(gene));
  Modulation gmod = build_modulation(gnet);
  CHECK(gmod.A[0](0, 0) == doctest::Approx(-1.0));
  CHECK(gmod.B[0](0) == doctest::Approx(0.0));
  CHECK(gmod.B[1](0) == doctest::Approx(3.0));
}

TEST_CASE("modulation of a species with no consuming reaction has zero column") {
  const char* text = R"(
[species]
names = S1 S2

[environment]
states = a b
row a = -1 1
row b = 1 -1

[reactions]
reaction = 0 -> S1 : 1 1
reaction = S1 -> S2 : 1 2
reaction = 0 -> S2 : 1 0
)";
  ModulatedNetwork net = validate_network(parse_model(text));
  Modulation mod = build_modulation(net);
  CHECK(mod.A[0](1, 1) == 0.0);
  CHECK(mod.A[0](0, 1) == 0.0);
  CHECK(mod.A[0](1, 0) == doctest::Approx(1.0));
  CHECK(mod.A[1](0, 0) == doctest::Approx(-2.0));
}

TEST_CASE("modulation invariants on random networks") {
  RngStream rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    ModulatedNetwork net = random_network(rng);
    Modulation mod = build_modulation(net);
    for (int x = 0; x < net.env_count(); ++x) {
      const auto& a = mod.A[static_cast<std::size_t>(x)];
      for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
          if (i != j) CHECK(a(i, j) >= 0.0);
      for (int j = 0; j < a.cols(); ++j) CHECK(a.col(j).sum() <= 1e-12);
      CHECK((mod.B[static_cast<std::size_t>(x)].array() >= 0.0).all());
    }
  }
}

TEST_CASE("stationary distribution of a two-state environment") {
  RawModel raw = birth_death_two_state(1, 1, 1, 1, 0.3, 1.7);
  ModulatedNetwork net = validate_network(raw);
  Eigen::VectorXd pi = stationary_env(net.env);
  CHECK(pi(0) == doctest::Approx(1.7 / 2.0).epsilon(1e-12));
  CHECK(pi(1) == doctest::Approx(0.3 / 2.0).epsilon(1e-12));
}

TEST_CASE("stationary distribution of the gene environment is binomial") {
  const Fixture* f = find_fixture("gene-n2");
  REQUIRE(f != nullptr);
  ModulatedNetwork net = validate_network(parse_model(std::string(f->model_text)));
  Eigen::VectorXd pi = stationary_env(net.env);
  // Two copies, activation weight a1/(a1+a2) = 1/3 per copy.
  CHECK(pi(0) == doctest::Approx(4.0 / 9.0).epsilon(1e-10));
  CHECK(pi(1) == doctest::Approx(4.0 / 9.0).epsilon(1e-10));
  CHECK(pi(2) == doctest::Approx(1.0 / 9.0).epsilon(1e-10));
}

TEST_CASE("stationary distribution of the cycling environment is a Poisson product form") {
  const Fixture* f = find_fixture("cycle-env");
  REQUIRE(f != nullptr);
  ModulatedNetwork net = validate_network(parse_model(std::string(f->model_text)));
  Eigen::VectorXd pi = stationary_env(net.env);

  // Flux balance around the three reaction complexes with rates
  // (a1, a2, a3, a4) = (1, 2, 8, 8) gives mean pair (1/4, 2).
  const double b1 = 0.25, b2 = 2.0;
  Eigen::VectorXd expected(net.env_count());
  for (int x = 0; x < net.env_count(); ++x) {
    const std::string& name = net.env.state_names[static_cast<std::size_t>(x)];
    auto us = name.find('_');
    int x1 = std::stoi(name.substr(1, us - 1));
    int x2 = std::stoi(name.substr(us + 1));
    expected(x) = std::pow(b1, x1) / std::tgamma(x1 + 1.0) * std::pow(b2, x2) / std::tgamma(x2 + 1.0);
  }
  expected /= expected.sum();
  CHECK((pi - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("mean production diagnostics") {
  ModulatedNetwork net = validate_network(birth_death_two_state(1, 1, 1, 1));
  Eigen::VectorXd pi = stationary_env(net.env);
  CHECK(mean_production(net, pi) == doctest::Approx(1.0));

  ModulatedNetwork pair = validate_network(parse_model(
      "[species]\nnames = S1 S2\n[environment]\nstates = a b\nrow a = -1 1\nrow b = 1 -1\n"
      "[reactions]\nreaction = S1 -> S2 : 1 1\nreaction = S2 -> S1 : 1 1"));
  CHECK(mean_production(pair, stationary_env(pair.env)) == 0.0);

  const Fixture* gene = find_fixture("gene-n1");
  REQUIRE(gene != nullptr);
  ModulatedNetwork gnet = validate_network(parse_model(std::string(gene->model_text)));
  // Weighted production: rate 3 in the active state, which has weight 1/3,
  // against the brute-force sum over the two states.
  Eigen::VectorXd pi2 = stationary_env(gnet.env);
  double direct = 0.0;
  for (int x = 0; x < 2; ++x) direct += gnet.production_rate(0, x) * pi2(x);
  CHECK(mean_production(gnet, pi2) == doctest::Approx(direct).epsilon(1e-14));
  CHECK(mean_production(gnet, pi2) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("serialize-parse-validate round trip is the identity on accepted models") {
  RngStream rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    ModulatedNetwork net = random_network(rng);
    RawModel again = parse_model(serialize_model(net));
    ModulatedNetwork net2 = validate_network(again);
    REQUIRE(net2.species_count() == net.species_count());
    REQUIRE(net2.env_count() == net.env_count());
    CHECK((net2.env.generator - net.env.generator).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(net2.reactions.size() == net.reactions.size());
    for (std::size_t r = 0; r < net.reactions.size(); ++r) {
      CHECK(net2.reactions[r].kind == net.reactions[r].kind);
      CHECK(net2.reactions[r].source == net.reactions[r].source);
      CHECK(net2.reactions[r].target == net.reactions[r].target);
      CHECK(net2.reactions[r].burst == net.reactions[r].burst);
      CHECK(net2.reactions[r].rate.values == net.reactions[r].rate.values);
    }
  }
}
