#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <map>
#include <numbers>

#include "wiretap/gaussmodel.hpp"

using namespace wiretap;

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

TEST_CASE("compose_round reproduces the channel equations") {
  const ChannelParams unit{1, 1, 0, 1, 1};
  const RoundSample r = compose_round(unit, 1.0, 0.0, 0.0, 0.0);
  CHECK(r.a == 1.0);
  CHECK(r.b == 1.0);
  CHECK(r.e == 1.0);
  CHECK(r.y == 0.0);

  const ChannelParams offset{1, 1, 5, 1, 1};
  CHECK(compose_round(offset, 0, 0, 0, 0).b == 5.0);

  const ChannelParams p{2, 0.5, 1, 3, 4};
  const RoundSample s = compose_round(p, 0.5, -1, 2, 0.25);
  CHECK(s.b == doctest::Approx(2 * 0.5 + 0.25 - 0.5 + 1));
  CHECK(s.e == doctest::Approx(3 * 0.5 + 4 * 2));
}

TEST_CASE("variance of B follows the law of total variance") {
  const ChannelParams p{kSqrt2, 1, 0, kSqrt2, 1};
  const NoiseSpec noise = NoiseSpec::gaussian(0.2);
  Rng rng(11);
  const int rounds = 1000000;
  double sum = 0, sq = 0;
  for (int i = 0; i < rounds; ++i) {
    const double b = sample_round(p, noise, rng).b;
    sum += b;
    sq += b * b;
  }
  const double mean = sum / rounds;
  const double var = (sq - rounds * mean * mean) / (rounds - 1);
  CHECK(std::abs(var - 3.2) < 0.02);
}

TEST_CASE("sampling is reproducible under a fixed seed") {
  const ChannelParams p{kSqrt2, 1, 0.3, kSqrt2, 1};
  const NoiseSpec noise = NoiseSpec::gaussian(0.2);
  Rng r1(99), r2(99);
  for (int i = 0; i < 100; ++i) {
    const RoundSample x = sample_round(p, noise, r1);
    const RoundSample y = sample_round(p, noise, r2);
    CHECK(x.b == y.b);
    CHECK(x.e == y.e);
  }
}

TEST_CASE("noise specifications") {
  SUBCASE("gaussian") {
    CHECK(NoiseSpec::gaussian(0.7).variance() == 0.7);
    CHECK_THROWS_AS(NoiseSpec::gaussian(-1), std::invalid_argument);
  }
  SUBCASE("mixture second moment is exact") {
    const NoiseSpec m = NoiseSpec::mixture({{0.5, -1, 0.5}, {0.5, 1, 0.5}});
    CHECK(m.variance() == doctest::Approx(1.25));
    CHECK_THROWS_AS(NoiseSpec::mixture({{0.5, 0, 1}, {0.4, 0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(NoiseSpec::mixture({{0.5, 1, 1}, {0.5, 0, 1}}), std::invalid_argument);
  }
  SUBCASE("empirical values are centered") {
    const NoiseSpec e = NoiseSpec::empirical({1, 2, 3, 6});
    // centered values -2, -1, 0, 3
    CHECK(e.variance() == doctest::Approx(14.0 / 4));
    Rng rng(1);
    double total = 0;
    for (int i = 0; i < 20000; ++i) total += e.sample(rng);
    CHECK(std::abs(total / 20000) < 0.05);
  }
}

TEST_CASE("reduce_eprime") {
  const EveReduced r = reduce_eprime({1, 1, 0, 1, 1}, 2.0, 0.0);
  CHECK(r.e_prime == doctest::Approx(1.0));
  CHECK(r.v_cond == doctest::Approx(1.5));

  CHECK(reduce_eprime({3, 2, 1, 0.5, 4}, 0.0, 0.0).e_prime == 0.0);

  const EveReduced s = reduce_eprime({kSqrt2, 1, 0, kSqrt2, 1}, 3.0, 1.0);
  CHECK(s.e_prime == doctest::Approx(3.0));
  CHECK(s.v_cond == doctest::Approx(5.0 / 3.0));
  CHECK(s.mean_offset == doctest::Approx(3.0));

  const EveReduced t = reduce_eprime({kSqrt2, 1, 0.5, kSqrt2, 1}, 3.0, 1.0);
  CHECK(t.mean_offset == doctest::Approx(3.5));
}

TEST_CASE("correlation coefficients") {
  SUBCASE("symmetric scenario closed forms") {
    for (double x : {0.0, 0.2, 0.5, 2.0 / 3.0, 1.0, 3.0}) {
      const Correlations c = rho_squared({kSqrt2, 1, 0, kSqrt2, 1}, x);
      CHECK(c.rho_A_sq == doctest::Approx(2.0 / (3.0 + x)));
      CHECK(c.rho_Eprime_sq == doctest::Approx((4.0 + 3.0 * x) / (9.0 + 3.0 * x)));
    }
  }
  SUBCASE("noiseless Bob") {
    CHECK(rho_squared({1, 1e-12, 0, 1e-9, 1}, 0.0).rho_A_sq == doctest::Approx(1.0));
  }
  SUBCASE("E'' coefficient") {
    CHECK(rho_squared({kSqrt2, 1, 0, kSqrt2, 1}, 0.2).rho_Edprime_sq == doctest::Approx(0.375));
  }
  SUBCASE("degenerate") {
    CHECK_THROWS(rho_squared({0, 0, 0, 1, 1}, 0.0));
  }
}

TEST_CASE("advantage condition") {
  const ChannelParams typical{kSqrt2, 1, 0, kSqrt2, 1};
  CHECK(advantage_condition(typical, 0.6));
  CHECK_FALSE(advantage_condition(typical, 0.7));
  CHECK_FALSE(advantage_condition(typical, 2.0 / 3.0 + 1e-9));
  CHECK(advantage_condition(typical, 2.0 / 3.0 - 1e-9));
  CHECK(advantage_condition(typical, 0.0));
  CHECK_FALSE(advantage_condition({1, 1, 0, 3, 1}, 0.2));
}

TEST_CASE("advantage condition agrees with the correlation ordering") {
  Rng rng(2024);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  int agree = 0;
  for (int i = 0; i < 100; ++i) {
    const ChannelParams p{u(rng), u(rng), 0, u(rng), u(rng)};
    const double v_y = u(rng) - 0.05;
    const Correlations c = rho_squared(p, v_y);
    agree += advantage_condition(p, v_y) == (c.rho_Eprime_sq < c.rho_A_sq);
    // branch condition of the second estimation step
    const bool prime = p.a_B * p.a_B * p.a_E * p.a_E / (p.a_E * p.a_E + p.b_E * p.b_E) >= p.b_B * p.b_B;
    CHECK(prime == (c.rho_Eprime_sq >= c.rho_Edprime_sq));
  }
  CHECK(agree == 100);
}

TEST_CASE("multi-antenna reduction") {
  const std::array<AntennaGain, 1> one{{{2.0, 0.7}}};
  const AntennaGain r1 = reduce_multi_antenna(one);
  CHECK(r1.a == doctest::Approx(2.0));
  CHECK(r1.b == doctest::Approx(0.7));

  const std::array<AntennaGain, 4> four{{{1.5, 0.8}, {1.5, 0.8}, {1.5, 0.8}, {1.5, 0.8}}};
  const AntennaGain r4 = reduce_multi_antenna(four);
  CHECK(r4.a == doctest::Approx(1.5));
  CHECK(r4.b == doctest::Approx(0.4));

  const std::array<AntennaGain, 2> mixed{{{1, 1}, {2, 2}}};
  const AntennaGain rm = reduce_multi_antenna(mixed);
  CHECK(rm.a == doctest::Approx(1.0));
  CHECK(rm.b == doctest::Approx(std::sqrt(2.0) / 2));

  CHECK_THROWS(reduce_multi_antenna(std::span<const AntennaGain>{}));

  double prev = 1e300;
  for (std::size_t k = 1; k <= 16; ++k) {
    std::vector<AntennaGain> same(k, AntennaGain{1.2, 0.9});
    const double b = reduce_multi_antenna(same).b;
    CHECK(b < prev);
    prev = b;
  }
}

TEST_CASE("complex channel reduction") {
  SUBCASE("zero phases") {
    const RealChannelPair r = reduce_complex({2, 1, 0.7, 1, 1});
    CHECK(r.real.e_B == doctest::Approx(0.7));
    CHECK(r.imag.e_B == doctest::Approx(0.0));
  }
  SUBCASE("quarter turn") {
    ComplexChannel c{2, 1, 1, 1, 1};
    c.theta_3 = std::numbers::pi / 2;
    const RealChannelPair r = reduce_complex(c);
    CHECK(std::abs(r.real.e_B) < 1e-12);
    CHECK(r.imag.e_B == doctest::Approx(1.0));
  }
  SUBCASE("magnitudes survive any phases") {
    ComplexChannel c{2, 1, 0.5, 1, 1, 0.3, -1.1, 2.0, 0.4, 0.9, 1.7};
    const RealChannelPair r = reduce_complex(c);
    for (const ChannelParams& p : {r.real, r.imag}) {
      CHECK(p.a_B == doctest::Approx(2));
      CHECK(p.b_B == doctest::Approx(1));
      CHECK(p.a_E == doctest::Approx(1));
      CHECK(p.b_E == doctest::Approx(1));
    }
    CHECK(r.real.e_B == doctest::Approx(0.5 * std::cos(1.7 - 0.3)));
    CHECK(r.imag.e_B == doctest::Approx(0.5 * std::sin(1.7 - 0.3)));
  }
}

TEST_CASE("conditional law of B given E' matches the reduction") {
  const ChannelParams p{kSqrt2, 1, 0.4, kSqrt2, 1};
  const NoiseSpec noise = NoiseSpec::gaussian(0.2);
  Rng rng(7);
  // Bin by e'; within a narrow bin B - e' is approximately N(e_B, v_cond).
  struct Acc {
    double n = 0, sum = 0, sq = 0;
  };
  std::map<int, Acc> bins;
  const double width = 0.05;
  for (int i = 0; i < 400000; ++i) {
    const RoundSample r = sample_round(p, noise, rng);
    const EveReduced red = reduce_eprime(p, r.e, r.y);
    Acc& acc = bins[static_cast<int>(std::floor(red.e_prime / width))];
    const double d = r.b - red.mean_offset;
    acc.n += 1;
    acc.sum += d;
    acc.sq += d * d;
  }
  const double v = conditional_variance(p);
  int checked = 0;
  for (const auto& [key, acc] : bins) {
    if (acc.n < 2000) continue;
    ++checked;
    const double mean = acc.sum / acc.n;
    const double var = (acc.sq - acc.n * mean * mean) / (acc.n - 1);
    CHECK(std::abs(mean) <= 3 * std::sqrt(v / acc.n) + 1e-12);
    CHECK(std::abs(var - v) <= 3 * v * std::sqrt(2.0 / (acc.n - 1)));
  }
  CHECK(checked >= 10);
}
