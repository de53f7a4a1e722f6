#include "wiretap/reconciliation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace wiretap {

namespace {

std::uint64_t window(const std::vector<std::uint64_t>& words, std::size_t offset) {
  const std::size_t w = offset >> 6;
  const unsigned shift = offset & 63;
  const std::uint64_t low = w < words.size() ? words[w] : 0;
  if (shift == 0) return low;
  const std::uint64_t high = w + 1 < words.size() ? words[w + 1] : 0;
  return (low >> shift) | (high << (64 - shift));
}

bool parity(const BitString& a, const BitString& b) {
  std::uint64_t acc = 0;
  const auto& wa = a.words();
  const auto& wb = b.words();
  for (std::size_t w = 0; w < wa.size(); ++w) acc ^= wa[w] & wb[w];
  return std::popcount(acc) & 1;
}

}  // namespace

LinearCode::LinearCode(std::size_t n_code, std::vector<std::vector<std::uint32_t>> rows)
    : n_(n_code), rows_(std::move(rows)), cols_(n_code) {
  if (n_ == 0) throw std::invalid_argument("code length must be positive");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    auto& row = rows_[i];
    std::sort(row.begin(), row.end());
    if (std::adjacent_find(row.begin(), row.end()) != row.end())
      throw std::invalid_argument("parity check lists a column twice");
    for (auto c : row) {
      if (c >= n_) throw std::invalid_argument("parity check column out of range");
      cols_[c].push_back(static_cast<std::uint32_t>(i));
    }
  }
  eliminate();
}

void LinearCode::eliminate() {
  const std::size_t r = rows_.size();
  const std::size_t width = n_ + r;
  std::vector<BitString> work(r, BitString(width));
  for (std::size_t i = 0; i < r; ++i) {
    for (auto c : rows_[i]) work[i].set(c, true);
    work[i].set(n_ + i, true);
  }
  std::size_t rank = 0;
  for (std::size_t col = 0; col < n_ && rank < r; ++col) {
    std::size_t p = rank;
    while (p < r && !work[p].get(col)) ++p;
    if (p == r) continue;
    std::swap(work[p], work[rank]);
    const auto& pivot = work[rank].words();
    const std::size_t first_word = col >> 6;
    for (std::size_t i = 0; i < r; ++i) {
      if (i == rank || !work[i].get(col)) continue;
      auto& target = work[i].words();
      for (std::size_t w = first_word; w < target.size(); ++w) target[w] ^= pivot[w];
    }
    pivots_.push_back(static_cast<std::uint32_t>(col));
    ++rank;
  }
  for (std::size_t col = 0, k = 0; col < n_; ++col) {
    if (k < pivots_.size() && pivots_[k] == col)
      ++k;
    else
      free_.push_back(static_cast<std::uint32_t>(col));
  }
  transform_.assign(r, BitString(r));
  for (std::size_t k = 0; k < r; ++k) {
    auto& dst = transform_[k].words();
    for (std::size_t w = 0; w < dst.size(); ++w) dst[w] = window(work[k].words(), n_ + 64 * w);
    if (r % 64 != 0) dst.back() &= (std::uint64_t{1} << (r % 64)) - 1;
  }
}

LinearCode LinearCode::from_alist(std::istream& in) {
  std::size_t n = 0, m = 0, max_col = 0, max_row = 0;
  if (!(in >> n >> m >> max_col >> max_row)) throw std::runtime_error("alist: malformed header");
  std::vector<std::size_t> col_weight(n), row_weight(m);
  for (auto& w : col_weight)
    if (!(in >> w) || w > max_col) throw std::runtime_error("alist: bad column weight");
  for (auto& w : row_weight)
    if (!(in >> w) || w > max_row) throw std::runtime_error("alist: bad row weight");

  std::vector<std::vector<std::uint32_t>> from_cols(m);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t k = 0; k < max_col; ++k) {
      long idx = 0;
      if (!(in >> idx)) throw std::runtime_error("alist: truncated column list");
      if (k < col_weight[c]) {
        if (idx < 1 || static_cast<std::size_t>(idx) > m) throw std::runtime_error("alist: row index out of range");
        from_cols[static_cast<std::size_t>(idx - 1)].push_back(static_cast<std::uint32_t>(c));
      } else if (idx != 0) {
        throw std::runtime_error("alist: column padding must be 0");
      }
    }
  }
  std::vector<std::vector<std::uint32_t>> rows(m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t k = 0; k < max_row; ++k) {
      long idx = 0;
      if (!(in >> idx)) {
        // Some writers omit zero padding on the last lines.
        if (k >= row_weight[r]) break;
        throw std::runtime_error("alist: truncated row list");
      }
      if (k < row_weight[r]) {
        if (idx < 1 || static_cast<std::size_t>(idx) > n) throw std::runtime_error("alist: column index out of range");
        rows[r].push_back(static_cast<std::uint32_t>(idx - 1));
      } else if (idx != 0) {
        throw std::runtime_error("alist: row padding must be 0");
      }
    }
    auto sorted = rows[r];
    std::sort(sorted.begin(), sorted.end());
    std::sort(from_cols[r].begin(), from_cols[r].end());
    if (sorted != from_cols[r]) throw std::runtime_error("alist: row and column lists disagree");
  }
  return LinearCode(n, std::move(rows));
}

LinearCode LinearCode::load_alist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open alist file: " + path);
  return from_alist(in);
}

void LinearCode::write_alist(std::ostream& out) const {
  std::size_t max_col = 0, max_row = 0;
  for (const auto& c : cols_) max_col = std::max(max_col, c.size());
  for (const auto& r : rows_) max_row = std::max(max_row, r.size());
  out << n_ << ' ' << rows_.size() << '\n' << max_col << ' ' << max_row << '\n';
  auto weights = [&out](const auto& lists) {
    for (std::size_t i = 0; i < lists.size(); ++i) out << (i ? " " : "") << lists[i].size();
    out << '\n';
  };
  weights(cols_);
  weights(rows_);
  auto entries = [&out](const auto& lists, std::size_t width) {
    for (const auto& list : lists) {
      for (std::size_t k = 0; k < width; ++k) out << (k ? " " : "") << (k < list.size() ? list[k] + 1 : 0);
      out << '\n';
    }
  };
  entries(cols_, max_col);
  entries(rows_, max_row);
}

LinearCode LinearCode::gallager(std::size_t n_code, std::size_t wc, std::size_t wr, Rng& rng) {
  if (wc == 0 || wr == 0 || n_code % wr != 0) throw std::invalid_argument("gallager: need wr | n and positive weights");
  const std::size_t band = n_code / wr;
  std::vector<std::vector<std::uint32_t>> rows;
  rows.reserve(band * wc);
  std::vector<std::uint32_t> perm(n_code);
  std::iota(perm.begin(), perm.end(), 0u);
  // columns already sharing a check; two of them in one new check close a 4-cycle
  std::vector<std::vector<std::uint32_t>> adjacent(n_code);
  auto linked = [&](std::uint32_t u, std::uint32_t v) {
    return std::find(adjacent[u].begin(), adjacent[u].end(), v) != adjacent[u].end();
  };
  auto conflicted = [&](std::size_t pos) {
    const std::size_t g = pos / wr * wr;
    for (std::size_t q = g; q < g + wr; ++q)
      if (q != pos && linked(perm[pos], perm[q])) return true;
    return false;
  };
  std::uniform_int_distribution<std::size_t> pick(0, n_code - 1);
  for (std::size_t b = 0; b < wc; ++b) {
    if (b > 0) {
      std::shuffle(perm.begin(), perm.end(), rng);
      for (int pass = 0; pass < 100; ++pass) {
        bool clean = true;
        for (std::size_t pos = 0; pos < n_code; ++pos) {
          if (!conflicted(pos)) continue;
          clean = false;
          const std::size_t other = pick(rng);
          std::swap(perm[pos], perm[other]);
          if (conflicted(pos) || conflicted(other)) std::swap(perm[pos], perm[other]);
        }
        if (clean) break;
      }
    }
    for (std::size_t i = 0; i < band; ++i)
      for (std::size_t j = 0; j < wr; ++j)
        for (std::size_t k = 0; k < wr; ++k)
          if (j != k) adjacent[perm[i * wr + j]].push_back(perm[i * wr + k]);
    for (std::size_t i = 0; i < band; ++i) {
      std::vector<std::uint32_t> row;
      for (std::size_t j = 0; j < wr; ++j) row.push_back(perm[i * wr + j]);
      rows.push_back(std::move(row));
    }
  }
  return LinearCode(n_code, std::move(rows));
}

BitString LinearCode::syndrome(const BitString& x) const {
  if (x.size() != n_) throw std::invalid_argument("syndrome: length mismatch");
  BitString s(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    bool p = false;
    for (auto c : rows_[i]) p ^= x.get(c);
    if (p) s.set(i, true);
  }
  return s;
}

BitString LinearCode::coset_representative(const BitString& syn) const {
  if (syn.size() != rows_.size()) throw std::invalid_argument("coset_representative: length mismatch");
  BitString alpha(n_);
  for (std::size_t k = 0; k < transform_.size(); ++k) {
    const bool bit = parity(transform_[k], syn);
    if (k < pivots_.size())
      alpha.set(pivots_[k], bit);
    else if (bit)
      throw std::invalid_argument("coset_representative: syndrome is not in the image of the parity map");
  }
  return alpha;
}

BitString LinearCode::information_bits(const BitString& codeword) const {
  if (codeword.size() != n_) throw std::invalid_argument("information_bits: length mismatch");
  BitString out(free_.size());
  for (std::size_t k = 0; k < free_.size(); ++k) out.set(k, codeword.get(free_[k]));
  return out;
}

BitString discretize(const Vector& b, double e_hat) {
  BitString out(static_cast<std::size_t>(b.size()));
  for (Eigen::Index i = 0; i < b.size(); ++i)
    if (b(i) - e_hat < 0) out.set(static_cast<std::size_t>(i), true);
  return out;
}

SoftChannel::SoftChannel(double c_hat, EmpiricalCdf residuals) : c_hat_(c_hat), residuals_(std::move(residuals)) {
  if (c_hat_ == 0) throw std::invalid_argument("SoftChannel: c_hat is zero");
  // p0 = E_A[1 - F(-c A)]; integrate the step function exactly over Gaussian A.
  const auto& r = residuals_.points();
  const double l = static_cast<double>(r.size());
  std::vector<double> thresholds(r.size());
  std::transform(r.begin(), r.end(), thresholds.begin(), [&](double ri) { return -ri / c_hat_; });
  std::sort(thresholds.begin(), thresholds.end());
  double p0 = 0;
  double prev = 0;
  for (std::size_t i = 0; i <= thresholds.size(); ++i) {
    const double cdf = i < thresholds.size() ? normal_cdf(thresholds[i]) : 1.0;
    const double below = static_cast<double>(i) / l;
    p0 += (cdf - prev) * (c_hat_ > 0 ? below : 1.0 - below);
    prev = cdf;
  }
  p0 = std::clamp(p0, 1e-300, 1.0 - 1e-16);
  log_prior_ratio_ = std::log1p(-p0) - std::log(p0);
}

double SoftChannel::prob_zero(double a) const { return 1.0 - residuals_(-c_hat_ * a); }

double channel_llr(const SoftChannel& chan, double a, bool flip) {
  const double q = chan.prob_zero(flip ? -a : a);
  double llr;
  if (q <= 0)
    llr = -kLlrClamp;
  else if (q >= 1)
    llr = kLlrClamp;
  else
    llr = std::log(q) - std::log1p(-q) + chan.log_prior_ratio();
  return std::clamp(llr, -kLlrClamp, kLlrClamp);
}

namespace {

// phi(x) = -ln tanh(x/2), its own inverse on (0, inf).
double phi_fn(double x) {
  x = std::clamp(x, 1e-12, 50.0);
  return -std::log(std::tanh(0.5 * x));
}

}  // namespace

DecodeResult bp_decode(const LinearCode& code, const std::vector<double>& llrs, int max_iters) {
  const std::size_t n = code.length();
  if (llrs.size() != n) throw std::invalid_argument("bp_decode: llr length mismatch");
  const auto& rows = code.rows();

  std::vector<std::size_t> row_start(rows.size() + 1, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) row_start[i + 1] = row_start[i] + rows[i].size();
  const std::size_t edges = row_start.back();
  std::vector<std::uint32_t> edge_var(edges);
  std::vector<std::vector<std::size_t>> var_edges(n);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      const std::size_t e = row_start[i] + k;
      edge_var[e] = rows[i][k];
      var_edges[rows[i][k]].push_back(e);
    }

  std::vector<double> v2c(edges), c2v(edges, 0.0);
  for (std::size_t e = 0; e < edges; ++e) v2c[e] = llrs[edge_var[e]];

  DecodeResult result{BitString(n), false, 0};
  for (std::size_t v = 0; v < n; ++v)
    if (llrs[v] < 0) result.codeword.set(v, true);
  if (code.is_codeword(result.codeword)) {
    result.converged = true;
    return result;
  }

  for (int it = 1; it <= max_iters; ++it) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double sum = 0;
      bool negative = false;
      for (std::size_t e = row_start[i]; e < row_start[i + 1]; ++e) {
        sum += phi_fn(std::abs(v2c[e]));
        negative ^= v2c[e] < 0;
      }
      for (std::size_t e = row_start[i]; e < row_start[i + 1]; ++e) {
        const double mag = phi_fn(std::max(sum - phi_fn(std::abs(v2c[e])), 0.0));
        const bool neg = negative ^ (v2c[e] < 0);
        c2v[e] = neg ? -mag : mag;
      }
    }
    for (std::size_t v = 0; v < n; ++v) {
      double total = llrs[v];
      for (auto e : var_edges[v]) total += c2v[e];
      result.codeword.set(v, total < 0);
      for (auto e : var_edges[v]) v2c[e] = total - c2v[e];
    }
    result.iterations = it;
    if (code.is_codeword(result.codeword)) {
      result.converged = true;
      break;
    }
  }
  return result;
}

ReconcileResult reconcile(const LinearCode& code, const BitString& bob_bits, const Vector& alice_a,
                          const SoftChannel& chan, int max_iters) {
  if (bob_bits.size() != code.length() || static_cast<std::size_t>(alice_a.size()) != code.length())
    throw std::invalid_argument("reconcile: lengths must equal the code length");
  ReconcileResult out;
  out.alpha = code.coset_representative(code.syndrome(bob_bits));
  out.bob_codeword = bob_bits ^ out.alpha;
  std::vector<double> llrs(code.length());
  for (std::size_t i = 0; i < llrs.size(); ++i)
    llrs[i] = channel_llr(chan, alice_a(static_cast<Eigen::Index>(i)), out.alpha.get(i));
  auto decoded = bp_decode(code, llrs, max_iters);
  out.alice_estimate = std::move(decoded.codeword);
  out.converged = decoded.converged;
  return out;
}

}  // namespace wiretap
