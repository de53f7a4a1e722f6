#ifndef WIRETAP_RECONCILIATION_HPP
#define WIRETAP_RECONCILIATION_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wiretap/estimation.hpp"
#include "wiretap/hashing.hpp"

namespace wiretap {

/// Binary linear code given by a sparse parity-check matrix.
///
/// On construction the matrix is brought to reduced row echelon form (pivot
/// columns chosen left to right, first unused row wins) while tracking the
/// row transform, which fixes a deterministic right inverse alpha of the
/// syndrome map: alpha(s) is supported on the pivot columns.
class LinearCode {
 public:
  /// rows[i] lists the columns of parity check i.
  LinearCode(std::size_t n_code, std::vector<std::vector<std::uint32_t>> rows);

  static LinearCode from_alist(std::istream& in);
  static LinearCode load_alist(const std::string& path);
  void write_alist(std::ostream& out) const;

  /// Regular Gallager ensemble: column weight wc, row weight wr, wr | n.
  /// Later bands are permuted until no two columns share more than one check.
  static LinearCode gallager(std::size_t n_code, std::size_t wc, std::size_t wr, Rng& rng);

  std::size_t length() const { return n_; }
  std::size_t checks() const { return rows_.size(); }
  std::size_t rank() const { return pivots_.size(); }
  std::size_t dimension() const { return n_ - rank(); }
  const std::vector<std::vector<std::uint32_t>>& rows() const { return rows_; }
  const std::vector<std::vector<std::uint32_t>>& cols() const { return cols_; }

  BitString syndrome(const BitString& x) const;
  BitString coset_representative(const BitString& syndrome) const;
  bool is_codeword(const BitString& x) const { return syndrome(x).popcount() == 0; }
  /// Non-pivot columns; a codeword is determined by its bits there.
  const std::vector<std::uint32_t>& free_columns() const { return free_; }
  /// Restriction to the free columns, a bijection C -> F2^dim.
  BitString information_bits(const BitString& codeword) const;

 private:
  void eliminate();

  std::size_t n_;
  std::vector<std::vector<std::uint32_t>> rows_;
  std::vector<std::vector<std::uint32_t>> cols_;
  std::vector<std::uint32_t> pivots_;     // pivot column of reduced row k
  std::vector<std::uint32_t> free_;
  std::vector<BitString> transform_;      // row k of the row transform M (checks() bits)
};

/// Sign discretization: B' = 0 iff B - e_hat >= 0.
BitString discretize(const Vector& b, double e_hat);

/// Soft channel W_{A|B'} induced by the residual estimate.
class SoftChannel {
 public:
  SoftChannel(double c_hat, EmpiricalCdf residuals);

  /// P(B' = 0 | A = a) = 1 - F(-c_hat a).
  double prob_zero(double a) const;
  double c_hat() const { return c_hat_; }
  /// ln((1 - p0)/p0), the normalizer ratio of W(.|0) and W(.|1).
  double log_prior_ratio() const { return log_prior_ratio_; }

 private:
  double c_hat_;
  EmpiricalCdf residuals_;
  double log_prior_ratio_;
};

inline constexpr double kLlrClamp = 40.0;

/// ln(W(a'|0)/W(a'|1)) with a' = (-1)^flip a, clamped to +-40.
double channel_llr(const SoftChannel& chan, double a, bool flip);

struct DecodeResult {
  BitString codeword;
  bool converged;
  int iterations;
};

/// Sum-product decoding towards a codeword (zero syndrome). LLR sign
/// convention: positive favours bit 0.
DecodeResult bp_decode(const LinearCode& code, const std::vector<double>& llrs, int max_iters = 60);

struct ReconcileResult {
  BitString bob_codeword;
  BitString alice_estimate;
  BitString alpha;
  bool converged;
};

ReconcileResult reconcile(const LinearCode& code, const BitString& bob_bits, const Vector& alice_a,
                          const SoftChannel& chan, int max_iters = 60);

}  // namespace wiretap

#endif  // WIRETAP_RECONCILIATION_HPP
