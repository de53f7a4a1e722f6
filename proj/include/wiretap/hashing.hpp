#ifndef WIRETAP_HASHING_HPP
#define WIRETAP_HASHING_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wiretap/gaussmodel.hpp"

namespace wiretap {

/// Packed bit vector. Bit i lives in word i/64 at position i%64
/// (little-endian within the word); unused high bits of the last word are zero.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t length);
  static BitString from_bits(const std::vector<int>& bits);
  static BitString random(std::size_t length, Rng& rng);
  /// Lowercase hex, bit 0 as the most significant bit of the first digit,
  /// zero-padded to a whole digit.
  static BitString from_hex(std::string_view hex, std::size_t length);

  std::size_t size() const { return length_; }
  bool empty() const { return length_ == 0; }
  bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool value);
  void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  BitString& operator^=(const BitString& other);
  friend BitString operator^(BitString lhs, const BitString& rhs) { return lhs ^= rhs; }
  friend bool operator==(const BitString&, const BitString&) = default;

  /// First `count` bits.
  BitString prefix(std::size_t count) const;
  /// Bits [0, a.size()) from a followed by b.
  static BitString concat(const BitString& a, const BitString& b);
  std::size_t popcount() const;
  std::string to_hex() const;

  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t>& words() { return words_; }

 private:
  void clear_tail();

  std::vector<std::uint64_t> words_;
  std::size_t length_ = 0;
};

/// Seed of an n2 x n1 Toeplitz matrix over F2, T[i][j] = seed[i + (n1 - 1) - j].
struct ToeplitzSeed {
  BitString bits;
  std::size_t n1 = 0;
  std::size_t n2 = 0;

  /// Checks n2 <= n1 and bits.size() == n1 + n2 - 1.
  ToeplitzSeed(BitString bits, std::size_t n1, std::size_t n2);
  static ToeplitzSeed random(std::size_t n1, std::size_t n2, Rng& rng);
};

/// T * input over F2. Word-sliced: every set input bit XORs a 64-bit aligned
/// window of one of 64 pre-shifted seed copies into the output.
BitString toeplitz_hash(const ToeplitzSeed& seed, const BitString& input);

/// Fraction of the 2^(n1+n2-1) seeds under which c and c2 collide.
double pair_collision_frequency(std::size_t n1, std::size_t n2, std::uint32_t c, std::uint32_t c2);

/// Max over distinct pairs of the collision frequency, by exhaustive
/// enumeration of seeds. Restricted to n1 <= 12 and at most 2^32 work units.
double collision_probability(std::size_t n1, std::size_t n2);

/// m2-bit universal2 tag of `key`; the seed must be sized (key.size(), m2).
BitString verification_tag(const BitString& key, const ToeplitzSeed& seed, std::size_t m2);

/// Failure probability n 2^(1-k) of k-bit authentication over n rounds, clamped to 1.
double auth_failure_prob(std::size_t n, std::size_t k);

}  // namespace wiretap

#endif  // WIRETAP_HASHING_HPP
