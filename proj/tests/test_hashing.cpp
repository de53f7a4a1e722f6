#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <set>

#include "wiretap/hashing.hpp"

using namespace wiretap;

namespace {

BitString naive_hash(const BitString& seed, std::size_t n1, std::size_t n2, const BitString& x) {
  BitString out(n2);
  for (std::size_t i = 0; i < n2; ++i) {
    bool acc = false;
    for (std::size_t j = 0; j < n1; ++j) acc ^= seed.get(i + n1 - 1 - j) && x.get(j);
    out.set(i, acc);
  }
  return out;
}

BitString from_int(std::uint32_t v, std::size_t n) {
  BitString b(n);
  for (std::size_t i = 0; i < n; ++i) b.set(i, (v >> i) & 1u);
  return b;
}

}  // namespace

TEST_CASE("bit string basics") {
  const BitString b = BitString::from_bits({1, 0, 1, 1, 0});
  CHECK(b.size() == 5);
  CHECK(b.get(0));
  CHECK_FALSE(b.get(1));
  CHECK(b.popcount() == 3);
  CHECK(b.to_hex() == "b0");
  CHECK(BitString::from_hex("b0", 5) == b);
  CHECK(b.prefix(3) == BitString::from_bits({1, 0, 1}));
  CHECK(BitString::concat(BitString::from_bits({1}), BitString::from_bits({0, 1})) == BitString::from_bits({1, 0, 1}));
  CHECK_THROWS(BitString::from_hex("zz", 8));
  CHECK_THROWS(BitString::from_bits({2}));

  Rng rng(3);
  for (std::size_t len : {1u, 63u, 64u, 65u, 200u, 1000u}) {
    const BitString r = BitString::random(len, rng);
    CHECK(BitString::from_hex(r.to_hex(), len) == r);
    CHECK(r.to_hex().size() == (len + 3) / 4);
    if (len % 64) CHECK((r.words().back() >> (len % 64)) == 0);
  }
}

TEST_CASE("Toeplitz convention for n1 = 2, n2 = 1") {
  // T = [s1 s0], so T x = s1 x0 + s0 x1
  for (int s = 0; s < 4; ++s)
    for (int x = 0; x < 4; ++x) {
      const ToeplitzSeed seed(from_int(s, 2), 2, 1);
      const bool s0 = s & 1, s1 = s & 2, x0 = x & 1, x1 = x & 2;
      CHECK(toeplitz_hash(seed, from_int(x, 2)).get(0) == ((s1 && x0) != (s0 && x1)));
    }
}

TEST_CASE("word-sliced hash matches the matrix product") {
  Rng rng(11);
  for (auto [n1, n2] : std::vector<std::pair<std::size_t, std::size_t>>{
           {1, 1}, {5, 3}, {64, 64}, {65, 1}, {130, 70}, {300, 129}, {1000, 1000}, {777, 0}}) {
    for (int trial = 0; trial < 5; ++trial) {
      const ToeplitzSeed seed = ToeplitzSeed::random(n1, n2, rng);
      const BitString x = BitString::random(n1, rng);
      CHECK(toeplitz_hash(seed, x) == naive_hash(seed.bits, n1, n2, x));
    }
  }
}

TEST_CASE("hash is linear") {
  for (std::uint32_t s = 0; s < 16; ++s) {
    const ToeplitzSeed seed(from_int(s, 4), 3, 2);
    for (std::uint32_t x = 0; x < 8; ++x)
      for (std::uint32_t y = 0; y < 8; ++y)
        CHECK((toeplitz_hash(seed, from_int(x, 3)) ^ toeplitz_hash(seed, from_int(y, 3))) ==
              toeplitz_hash(seed, from_int(x ^ y, 3)));
  }
}

TEST_CASE("exhaustive universal2 property") {
  for (std::size_t n1 = 1; n1 <= 8; ++n1)
    for (std::size_t n2 = 1; n2 <= n1; ++n2) {
      const double p = collision_probability(n1, n2);
      CHECK(p <= std::exp2(-static_cast<double>(n2)) + 1e-15);
      CHECK(p == doctest::Approx(std::exp2(-static_cast<double>(n2))));
    }
  CHECK(pair_collision_frequency(4, 2, 5, 5) == 1.0);
  CHECK_THROWS(collision_probability(13, 1));
  CHECK_THROWS(collision_probability(3, 4));
}

TEST_CASE("seed sensitivity") {
  Rng rng(5);
  const BitString x = BitString::random(512, rng);
  const ToeplitzSeed base = ToeplitzSeed::random(512, 64, rng);
  const BitString h = toeplitz_hash(base, x);
  int changed = 0;
  for (std::size_t i = 0; i < base.bits.size(); ++i) {
    ToeplitzSeed other = base;
    other.bits.flip(i);
    changed += toeplitz_hash(other, x) != h;
  }
  CHECK(changed > static_cast<int>(base.bits.size()) / 3);
}

TEST_CASE("tag collision rate") {
  Rng rng(77);
  const std::size_t m2 = 8;
  const BitString key = BitString::random(256, rng);
  BitString other = key;
  other.flip(17);
  other.flip(200);
  int hits = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    const ToeplitzSeed seed = ToeplitzSeed::random(256, m2, rng);
    hits += verification_tag(key, seed, m2) == verification_tag(other, seed, m2);
  }
  const double p = std::exp2(-8.0);
  CHECK(std::abs(hits / double(trials) - p) < 4 * std::sqrt(p * (1 - p) / trials));
}

TEST_CASE("tag edge cases") {
  Rng rng(1);
  const BitString key = BitString::random(40, rng);
  CHECK(verification_tag(key, ToeplitzSeed::random(40, 0, rng), 0).size() == 0);
  CHECK_THROWS(verification_tag(key, ToeplitzSeed::random(40, 8, rng), 9));
  CHECK_THROWS(verification_tag(key, ToeplitzSeed::random(41, 42, rng), 41));
  CHECK_THROWS(ToeplitzSeed(BitString(5), 4, 3));
  CHECK_THROWS(toeplitz_hash(ToeplitzSeed::random(10, 4, rng), BitString(11)));
}

TEST_CASE("authentication failure probability") {
  CHECK(auth_failure_prob(1000000, 41) == doctest::Approx(9.094947017729282e-07).epsilon(1e-12));
  CHECK(auth_failure_prob(10, 1) == 1.0);
  CHECK(auth_failure_prob(1, 1) == 1.0);
  CHECK(auth_failure_prob(1, 2) == 0.5);
  CHECK_THROWS(auth_failure_prob(1, 0));
}

TEST_CASE("million-bit hashing is fast") {
  Rng rng(9);
  const std::size_t n1 = 1000000, n2 = 500000;
  const ToeplitzSeed seed = ToeplitzSeed::random(n1, n2, rng);
  const BitString x = BitString::random(n1, rng);
  const auto t0 = std::chrono::steady_clock::now();
  const BitString h = toeplitz_hash(seed, x);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("1e6 -> 5e5 bit hash: " << secs << " s");
  CHECK(secs < 5.0);
  // spot-check a few output bits against the definition
  for (std::size_t i : {std::size_t{0}, std::size_t{12345}, n2 - 1}) {
    bool acc = false;
    for (std::size_t j = 0; j < n1; ++j) acc ^= seed.bits.get(i + n1 - 1 - j) && x.get(j);
    CHECK(h.get(i) == acc);
  }
}
