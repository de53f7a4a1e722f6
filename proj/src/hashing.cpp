#include "wiretap/hashing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace wiretap {

namespace {

std::size_t word_count(std::size_t bits) { return (bits + 63) / 64; }

/// 64 consecutive bits of `words` starting at bit `offset` (zero beyond the end).
std::uint64_t window(const std::vector<std::uint64_t>& words, std::size_t offset) {
  const std::size_t w = offset >> 6;
  const unsigned shift = offset & 63;
  const std::uint64_t low = w < words.size() ? words[w] : 0;
  if (shift == 0) return low;
  const std::uint64_t high = w + 1 < words.size() ? words[w + 1] : 0;
  return (low >> shift) | (high << (64 - shift));
}

}  // namespace

BitString::BitString(std::size_t length) : words_(word_count(length), 0), length_(length) {}

BitString BitString::from_bits(const std::vector<int>& bits) {
  BitString out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != 0 && bits[i] != 1) throw std::invalid_argument("bits must be 0 or 1");
    out.set(i, bits[i] == 1);
  }
  return out;
}

BitString BitString::random(std::size_t length, Rng& rng) {
  BitString out(length);
  for (auto& w : out.words_) w = rng();
  out.clear_tail();
  return out;
}

BitString BitString::from_hex(std::string_view hex, std::size_t length) {
  if (hex.size() != (length + 3) / 4) throw std::invalid_argument("hex string length does not match bit length");
  BitString out(length);
  for (std::size_t d = 0; d < hex.size(); ++d) {
    const char ch = hex[d];
    int value;
    if (ch >= '0' && ch <= '9')
      value = ch - '0';
    else if (ch >= 'a' && ch <= 'f')
      value = ch - 'a' + 10;
    else
      throw std::invalid_argument("invalid hex digit");
    for (int k = 0; k < 4; ++k) {
      const std::size_t i = 4 * d + static_cast<std::size_t>(k);
      const bool bit = (value >> (3 - k)) & 1;
      if (i < length)
        out.set(i, bit);
      else if (bit)
        throw std::invalid_argument("hex padding bits must be zero");
    }
  }
  return out;
}

void BitString::set(std::size_t i, bool value) {
  const std::uint64_t mask = std::uint64_t{1} << (i & 63);
  if (value)
    words_[i >> 6] |= mask;
  else
    words_[i >> 6] &= ~mask;
}

BitString& BitString::operator^=(const BitString& other) {
  if (other.length_ != length_) throw std::invalid_argument("xor of bit strings with different lengths");
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
  return *this;
}

BitString BitString::prefix(std::size_t count) const {
  if (count > length_) throw std::invalid_argument("prefix longer than bit string");
  BitString out(count);
  std::copy_n(words_.begin(), out.words_.size(), out.words_.begin());
  out.clear_tail();
  return out;
}

BitString BitString::concat(const BitString& a, const BitString& b) {
  BitString out(a.size() + b.size());
  std::copy(a.words_.begin(), a.words_.end(), out.words_.begin());
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b.get(i)) out.set(a.size() + i, true);
  return out;
}

std::size_t BitString::popcount() const {
  std::size_t total = 0;
  for (auto w : words_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

std::string BitString::to_hex() const {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out((length_ + 3) / 4, '0');
  for (std::size_t d = 0; d < out.size(); ++d) {
    int value = 0;
    for (int k = 0; k < 4; ++k) {
      const std::size_t i = 4 * d + static_cast<std::size_t>(k);
      if (i < length_ && get(i)) value |= 1 << (3 - k);
    }
    out[d] = digits[value];
  }
  return out;
}

void BitString::clear_tail() {
  if (length_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (length_ % 64)) - 1;
}

ToeplitzSeed::ToeplitzSeed(BitString b, std::size_t in, std::size_t out) : bits(std::move(b)), n1(in), n2(out) {
  if (n2 > n1) throw std::invalid_argument("Toeplitz output length exceeds input length");
  const std::size_t expected = n1 + n2 == 0 ? 0 : n1 + n2 - 1;
  if (n2 > 0 && bits.size() != expected) throw std::invalid_argument("Toeplitz seed must have n1 + n2 - 1 bits");
}

ToeplitzSeed ToeplitzSeed::random(std::size_t n1, std::size_t n2, Rng& rng) {
  return ToeplitzSeed(BitString::random(n2 == 0 ? 0 : n1 + n2 - 1, rng), n1, n2);
}

BitString toeplitz_hash(const ToeplitzSeed& seed, const BitString& input) {
  if (input.size() != seed.n1) throw std::invalid_argument("toeplitz_hash: input length does not match seed");
  BitString out(seed.n2);
  if (seed.n2 == 0) return out;
  const std::size_t n1 = seed.n1;
  const std::size_t out_words = out.words().size();
  const std::size_t shifted_words = word_count(seed.bits.size()) + 1;

  // out_i = XOR_k seed[i + k] * x[n1 - 1 - k]; shifted[r][w] holds seed bits from 64 w + r.
  std::vector<std::vector<std::uint64_t>> shifted(64, std::vector<std::uint64_t>(shifted_words));
  for (unsigned r = 0; r < 64; ++r)
    for (std::size_t w = 0; w < shifted_words; ++w) shifted[r][w] = window(seed.bits.words(), 64 * w + r);

  auto& acc = out.words();
  const auto& in = input.words();
  for (std::size_t wi = 0; wi < in.size(); ++wi) {
    std::uint64_t word = in[wi];
    while (word != 0) {
      const unsigned bit = static_cast<unsigned>(std::countr_zero(word));
      word &= word - 1;
      const std::size_t j = 64 * wi + bit;
      const std::size_t k = n1 - 1 - j;
      const std::uint64_t* src = shifted[k & 63].data() + (k >> 6);
      for (std::size_t w = 0; w < out_words; ++w) acc[w] ^= src[w];
    }
  }
  if (seed.n2 % 64 != 0) acc.back() &= (std::uint64_t{1} << (seed.n2 % 64)) - 1;
  return out;
}

namespace {

/// T d for small sizes with the seed and d packed into integers.
std::uint32_t small_hash(std::uint32_t seed, std::uint32_t d, std::size_t n1, std::size_t n2) {
  // Reverse d so that bit k of the reversed word is x[n1 - 1 - k].
  std::uint32_t reversed = 0;
  for (std::size_t k = 0; k < n1; ++k) reversed |= ((d >> (n1 - 1 - k)) & 1u) << k;
  const std::uint32_t mask = n1 >= 32 ? ~0u : ((1u << n1) - 1);
  std::uint32_t out = 0;
  for (std::size_t i = 0; i < n2; ++i)
    out |= static_cast<std::uint32_t>(std::popcount((seed >> i) & mask & reversed) & 1) << i;
  return out;
}

void check_small(std::size_t n1, std::size_t n2) {
  if (n1 == 0 || n1 > 12) throw std::invalid_argument("exhaustive collision check needs 1 <= n1 <= 12");
  if (n2 > n1) throw std::invalid_argument("n2 must not exceed n1");
  if (n2 == 0) return;
  if (n1 + (n1 + n2 - 1) > 32) throw std::invalid_argument("exhaustive collision check too large");
}

}  // namespace

double pair_collision_frequency(std::size_t n1, std::size_t n2, std::uint32_t c, std::uint32_t c2) {
  check_small(n1, n2);
  if (n2 == 0) return 1.0;
  const std::uint32_t d = c ^ c2;
  const std::uint32_t seeds = 1u << (n1 + n2 - 1);
  std::uint32_t hits = 0;
  for (std::uint32_t s = 0; s < seeds; ++s) hits += small_hash(s, d, n1, n2) == 0;
  return static_cast<double>(hits) / static_cast<double>(seeds);
}

double collision_probability(std::size_t n1, std::size_t n2) {
  check_small(n1, n2);
  double worst = 0;
  // By linearity c and c' collide iff T(c ^ c') = 0.
  for (std::uint32_t d = 1; d < (1u << n1); ++d) worst = std::max(worst, pair_collision_frequency(n1, n2, 0, d));
  return worst;
}

BitString verification_tag(const BitString& key, const ToeplitzSeed& seed, std::size_t m2) {
  if (m2 > key.size()) throw std::invalid_argument("verification tag longer than key");
  if (seed.n2 != m2) throw std::invalid_argument("verification seed output length differs from m2");
  if (m2 == 0) return BitString(0);
  return toeplitz_hash(seed, key);
}

double auth_failure_prob(std::size_t n, std::size_t k) {
  if (k < 1) throw std::invalid_argument("auth_failure_prob: k must be at least 1");
  return std::min(1.0, static_cast<double>(n) * std::exp2(1.0 - static_cast<double>(k)));
}

}  // namespace wiretap
