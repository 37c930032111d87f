#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "finite_diff.hpp"
#include "random_instances.hpp"
#include "selcal/csf.hpp"
#include "selcal/rng.hpp"

using namespace selcal;

TEST_CASE("csf names parse and print") {
  CHECK(parse_csf("msp") == CsfKind::MSP);
  CHECK(parse_csf("margin") == CsfKind::SoftmaxMargin);
  CHECK(parse_csf("negentropy") == CsfKind::NegativeEntropy);
  CHECK_THROWS_AS(parse_csf("entropy"), std::invalid_argument);
  CHECK(csf_name(CsfKind::MSP) == "msp");
  CHECK(csf_name(CsfKind::SoftmaxMargin) == "margin");
  CHECK(csf_name(CsfKind::NegativeEntropy) == "negentropy");
}

TEST_CASE("msp picks the top probability") {
  const std::vector<double> p{0.7, 0.2, 0.1};
  CHECK(csf_score(CsfKind::MSP, p) == 0.7);
}

TEST_CASE("margin is top minus runner-up") {
  const std::vector<double> p{0.7, 0.2, 0.1};
  CHECK(csf_score(CsfKind::SoftmaxMargin, p) == doctest::Approx(0.5));
  const std::vector<double> q{0.25, 0.4, 0.35};
  CHECK(csf_score(CsfKind::SoftmaxMargin, q) == doctest::Approx(0.05));
}

TEST_CASE("negative entropy of the uniform two-class vector") {
  const std::vector<double> p{0.5, 0.5};
  CHECK(csf_score(CsfKind::NegativeEntropy, p) ==
        doctest::Approx(-std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("negloss oracle scores by the negated loss") {
  const std::vector<double> p{0.6, 0.4};
  CHECK(csf_score(CsfKind::NegLossOracle, p, 1.25) == -1.25);
  CHECK_THROWS_AS(csf_score(CsfKind::NegLossOracle, p), std::invalid_argument);
}

TEST_CASE("csf scores ignore the label entirely") {
  Rng rng(31);
  const ProbBatch p = testsupport::random_prob_batch(rng, 12, 4);
  for (const CsfKind kind :
       {CsfKind::MSP, CsfKind::SoftmaxMargin, CsfKind::NegativeEntropy}) {
    const std::vector<double> s = csf_scores(kind, p);
    REQUIRE(s.size() == 12);
    for (std::size_t i = 0; i < 12; ++i)
      CHECK(s[i] == csf_score(kind, p.values.row(i)));
  }
}

TEST_CASE("msp and margin ignore permutations of the trailing classes") {
  const std::vector<double> p{0.5, 0.3, 0.15, 0.05};
  const std::vector<double> q{0.5, 0.3, 0.05, 0.15};
  for (const CsfKind kind : {CsfKind::MSP, CsfKind::SoftmaxMargin})
    CHECK(csf_score(kind, p) == csf_score(kind, q));
}

TEST_CASE("msp gradient is the argmax indicator") {
  const std::vector<double> p{0.7, 0.3};
  CHECK(csf_gradient(CsfKind::MSP, p) == std::vector<double>{1.0, 0.0});
  const std::vector<double> tie{0.5, 0.5};
  CHECK(csf_gradient(CsfKind::MSP, tie) == std::vector<double>{1.0, 0.0});
}

TEST_CASE("margin gradient marks top and runner-up") {
  const std::vector<double> p{0.7, 0.2, 0.1};
  CHECK(csf_gradient(CsfKind::SoftmaxMargin, p) ==
        std::vector<double>{1.0, -1.0, 0.0});
}

TEST_CASE("negative entropy gradient is log p plus one") {
  const std::vector<double> p{0.25, 0.75};
  const std::vector<double> g = csf_gradient(CsfKind::NegativeEntropy, p);
  CHECK(g[0] == doctest::Approx(std::log(0.25) + 1.0));
  CHECK(g[1] == doctest::Approx(std::log(0.75) + 1.0));
}

TEST_CASE("negloss oracle has no probability gradient") {
  const std::vector<double> p{0.5, 0.5};
  CHECK_THROWS_AS(csf_gradient(CsfKind::NegLossOracle, p), std::invalid_argument);
}

TEST_CASE("negative entropy gradient matches finite differences") {
  Rng rng(32);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p = testsupport::random_simplex_row(rng, 3 + trial % 3);
    const std::vector<double> g = csf_gradient(CsfKind::NegativeEntropy, p);
    for (std::size_t c = 0; c < p.size(); ++c) {
      // Off-simplex probe: the score formula extends smoothly, so plain
      // coordinate differences are valid.
      const double saved = p[c];
      p[c] = saved + h;
      const double up = csf_score(CsfKind::NegativeEntropy, p);
      p[c] = saved - h;
      const double down = csf_score(CsfKind::NegativeEntropy, p);
      p[c] = saved;
      const double fd = (up - down) / (2.0 * h);
      CHECK(testsupport::rel_err(g[c], fd) <= 1e-6);
    }
  }
}
