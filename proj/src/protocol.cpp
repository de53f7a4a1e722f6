#include "wiretap/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <stdexcept>

namespace wiretap {

LinearCode load_code(const CodeSpec& spec) {
  if (!spec.alist_path.empty()) return LinearCode::load_alist(spec.alist_path);
  Rng rng(spec.seed);
  return LinearCode::gallager(spec.n_code, spec.wc, spec.wr, rng);
}

void ProtocolConfig::validate() const {
  if (n < 1 || l < 2) throw std::invalid_argument("protocol: need n >= 1 and l >= 2");
  if (!(epsilon > 0 && epsilon < 0.5)) throw std::invalid_argument("protocol: epsilon must lie in (0, 1/2)");
  if (m2 < 1) throw std::invalid_argument("protocol: m2 must be at least 1");
  if (!std::isfinite(security_target_log2) || security_target_log2 >= 0)
    throw std::invalid_argument("protocol: security target must be a negative log2 value");
  if (max_bp_iters < 1) throw std::invalid_argument("protocol: max_bp_iters must be positive");
  if (subtract_auth && k_auth < 1) throw std::invalid_argument("protocol: subtract_auth needs k_auth >= 1");
}

std::string to_string(Status status) {
  switch (status) {
    case Status::Success: return "success";
    case Status::VerificationFailed: return "verification_failed";
    case Status::Aborted: return "aborted";
  }
  return "unknown";
}

std::string to_string(AbortReason reason) {
  switch (reason) {
    case AbortReason::None: return "none";
    case AbortReason::PostSelection: return "post_selection";
    case AbortReason::InsufficientCorrelation: return "insufficient_correlation";
    case AbortReason::RateExceedsCapacity: return "rate_exceeds_capacity";
    case AbortReason::TargetUnreachable: return "target_unreachable";
    case AbortReason::NoKeyLeft: return "no_key_left";
    case AbortReason::CodeMismatch: return "code_mismatch";
  }
  return "unknown";
}

RoundPartition partition_rounds(std::size_t n, std::size_t l, std::uint64_t seed) {
  std::vector<std::size_t> order(n + 2 * l);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng coin(seed);
  std::shuffle(order.begin(), order.end(), coin);
  RoundPartition part;
  part.est1.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(l));
  part.est2.assign(order.begin() + static_cast<std::ptrdiff_t>(l), order.begin() + static_cast<std::ptrdiff_t>(2 * l));
  part.distill.assign(order.begin() + static_cast<std::ptrdiff_t>(2 * l), order.end());
  std::sort(part.est1.begin(), part.est1.end());
  std::sort(part.est2.begin(), part.est2.end());
  std::sort(part.distill.begin(), part.distill.end());
  return part;
}

bool post_selection_gate(const EstimateBundle& bundle, const ChannelParams& params) {
  const double c_low = std::abs(bundle.c_hat) - bundle.half_width(bundle.v_ab_hat);
  if (c_low <= 0) return false;
  const double v_y = std::max(0.0, bundle.v_hat - bundle.c_hat * bundle.c_hat - params.b_B * params.b_B);
  ChannelParams shrunk = params;
  shrunk.a_B = c_low;
  return advantage_condition(shrunk, v_y);
}

CertificatePair certify(const Transcript& transcript, const EstimateBundle& bundle, const EveCdf& eve,
                        const ChannelParams& params, const ProtocolConfig& cfg) {
  const PhiHat ph = make_phi_hat(bundle, eve, params, cfg.epsilon);
  auto finish = [&](Criterion criterion) {
    SecurityCertificate cert = minimize_exponent(ph, cfg.n, transcript.m1, criterion);
    cert.padding = ph.padding();
    cert.underline = ph.model().v();
    cert.confidence = 1.0 - 2.0 * cfg.epsilon;
    return cert;
  };
  return {finish(Criterion::ModifiedMutualInfo), finish(Criterion::VariationalDistance)};
}

namespace {

Vector gather(const Vector& v, const std::vector<std::size_t>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Vector block(const Vector& v, std::size_t j, std::size_t len) {
  return v.segment(static_cast<Eigen::Index>(j * len), static_cast<Eigen::Index>(len));
}

struct AliceDecode {
  BitString info;
  std::size_t converged = 0;
};

AliceDecode alice_decode(const LinearCode& code, const Vector& a, const BitString& alpha, const SoftChannel& chan,
                         int max_iters) {
  const std::size_t len = code.length();
  AliceDecode out;
  for (std::size_t j = 0; j * len < static_cast<std::size_t>(a.size()); ++j) {
    const Vector aj = block(a, j, len);
    std::vector<double> llrs(len);
    for (std::size_t i = 0; i < len; ++i)
      llrs[i] = channel_llr(chan, aj(static_cast<Eigen::Index>(i)), alpha.get(j * len + i));
    const DecodeResult r = bp_decode(code, llrs, max_iters);
    out.converged += r.converged;
    out.info = BitString::concat(out.info, code.information_bits(r.codeword));
  }
  return out;
}

ProtocolOutcome abort_with(ProtocolOutcome out, AbortReason reason, std::string detail) {
  out.status = Status::Aborted;
  out.abort_reason = reason;
  out.detail = std::move(detail);
  return out;
}

}  // namespace

ProtocolOutcome run_protocol(const ChannelParams& params, const NoiseSpec& noise, const ProtocolConfig& cfg,
                             const LinearCode& code, Rng& rng) {
  cfg.validate();
  params.validate();
  ProtocolOutcome out;
  Transcript& tr = out.transcript;
  tr.m2 = cfg.m2;

  // Transmission.
  const std::size_t total = cfg.n + 2 * cfg.l;
  Vector a(static_cast<Eigen::Index>(total)), b(static_cast<Eigen::Index>(total));
  if (cfg.record_eve_view) {
    out.eve_e.resize(total);
    out.eve_y.resize(total);
  }
  for (std::size_t i = 0; i < total; ++i) {
    const RoundSample r = sample_round(params, noise, rng);
    a(static_cast<Eigen::Index>(i)) = r.a;
    b(static_cast<Eigen::Index>(i)) = r.b;
    if (cfg.record_eve_view) {
      out.eve_e[i] = r.e;
      out.eve_y[i] = r.y;
    }
  }

  if (cfg.n % code.length() != 0)
    return abort_with(std::move(out), AbortReason::CodeMismatch, "n is not a multiple of the code length");
  out.blocks = cfg.n / code.length();
  out.dim_c = out.blocks * code.dimension();

  // Estimation on two disjoint public-coin samples.
  tr.sampling_seed = rng();
  const RoundPartition part = partition_rounds(cfg.n, cfg.l, tr.sampling_seed);
  tr.est1_a = gather(a, part.est1);
  tr.est1_b = gather(b, part.est1);
  tr.est2_a = gather(a, part.est2);
  tr.est2_b = gather(b, part.est2);
  out.bundle = residuals(tr.est2_a, tr.est2_b, estimate_moments(tr.est1_a, tr.est1_b, cfg.epsilon));
  const EstimateBundle& bundle = out.bundle;
  tr.e_hat = bundle.e_hat;
  tr.v_hat = bundle.v_hat;
  tr.c_hat = bundle.c_hat;
  const EveCdf eve = estimate_eve_cdf(bundle, params);
  out.branch = eve.branch;

  if (cfg.post_selection && !post_selection_gate(bundle, params))
    return abort_with(std::move(out), AbortReason::PostSelection, "estimated advantage condition fails");
  if (bundle.c_lower() <= 0)
    return abort_with(std::move(out), AbortReason::InsufficientCorrelation, "lower confidence end of c_AB is not positive");

  const SoftChannel chan(bundle.c_hat, EmpiricalCdf(bundle.residuals));
  out.mi_ab_estimate = mutual_info_ab(bundle, EmpiricalCdf(bundle.residuals));
  const double rate = static_cast<double>(code.dimension()) / static_cast<double>(code.length());
  if (rate > out.mi_ab_estimate)
    return abort_with(std::move(out), AbortReason::RateExceedsCapacity,
                      "code rate " + std::to_string(rate) + " exceeds estimated I(A;B') " +
                          std::to_string(out.mi_ab_estimate));

  // Sacrifice length.
  try {
    const PhiHat ph = make_phi_hat(bundle, eve, params, cfg.epsilon);
    tr.m1 = sacrifice_length(ph, cfg.n, cfg.security_target_log2);
  } catch (const std::domain_error& e) {
    return abort_with(std::move(out), AbortReason::TargetUnreachable, e.what());
  }
  out.certificates = certify(tr, bundle, eve, params, cfg);
  out.has_certificates = true;
  if (tr.m1 + cfg.m2 > out.dim_c)
    return abort_with(std::move(out), AbortReason::NoKeyLeft,
                      "m1 + m2 = " + std::to_string(tr.m1 + cfg.m2) + " exceeds dim C = " + std::to_string(out.dim_c));

  // Reverse reconciliation, block by block.
  const Vector a_dist = gather(a, part.distill);
  const Vector b_dist = gather(b, part.distill);
  const BitString bob_bits = discretize(b_dist, bundle.e_hat);
  const std::size_t len = code.length();
  BitString bob_info;
  for (std::size_t j = 0; j < out.blocks; ++j) {
    BitString bj(len);
    for (std::size_t i = 0; i < len; ++i) bj.set(i, bob_bits.get(j * len + i));
    const BitString alpha = code.coset_representative(code.syndrome(bj));
    tr.alpha = BitString::concat(tr.alpha, alpha);
    bob_info = BitString::concat(bob_info, code.information_bits(bj ^ alpha));
  }
  AliceDecode alice = alice_decode(code, a_dist, tr.alpha, chan, cfg.max_bp_iters);
  out.blocks_converged = alice.converged;
  if (cfg.fault_flips > 0) {
    std::vector<std::size_t> pos(alice.info.size());
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    std::vector<std::size_t> chosen;
    std::sample(pos.begin(), pos.end(), std::back_inserter(chosen), cfg.fault_flips, rng);
    for (auto p : chosen) alice.info.flip(p);
  }

  // Privacy amplification and error verification.
  const std::size_t hashed = out.dim_c - tr.m1;
  const ToeplitzSeed pa = ToeplitzSeed::random(out.dim_c, hashed, rng);
  tr.pa_seed = pa.bits;
  BitString alice_key = toeplitz_hash(pa, alice.info);
  BitString bob_key = toeplitz_hash(pa, bob_info);
  const ToeplitzSeed vs = ToeplitzSeed::random(hashed, cfg.m2, rng);
  tr.verify_seed = vs.bits;
  tr.alice_tag = verification_tag(alice_key, vs, cfg.m2);
  tr.bob_tag = verification_tag(bob_key, vs, cfg.m2);
  if (cfg.k_auth > 0) out.auth_failure = auth_failure_prob(cfg.n, cfg.k_auth);
  if (!(tr.alice_tag == tr.bob_tag)) {
    out.status = Status::VerificationFailed;
    out.detail = "verification tags differ";
    return out;
  }
  out.alice_key = alice_key.prefix(hashed - cfg.m2);
  out.bob_key = bob_key.prefix(hashed - cfg.m2);
  const std::size_t charge = cfg.subtract_auth ? cfg.k_auth : 0;
  out.net_key_length = out.alice_key.size() > charge ? out.alice_key.size() - charge : 0;
  out.status = Status::Success;
  return out;
}

ProtocolOutcome run_protocol(const ChannelParams& params, const NoiseSpec& noise, const ProtocolConfig& cfg,
                             Rng& rng) {
  return run_protocol(params, noise, cfg, load_code(cfg.code), rng);
}

BitString alice_key_from_transcript(const Vector& alice_a, const Transcript& transcript, const ProtocolConfig& cfg,
                                    const LinearCode& code) {
  if (static_cast<std::size_t>(alice_a.size()) != cfg.n + 2 * cfg.l)
    throw std::invalid_argument("alice_key_from_transcript: expected n + 2l symbols");
  const RoundPartition part = partition_rounds(cfg.n, cfg.l, transcript.sampling_seed);
  const EstimateBundle bundle = residuals(transcript.est2_a, transcript.est2_b,
                                          estimate_moments(transcript.est1_a, transcript.est1_b, cfg.epsilon));
  const SoftChannel chan(bundle.c_hat, EmpiricalCdf(bundle.residuals));
  const AliceDecode alice = alice_decode(code, gather(alice_a, part.distill), transcript.alpha, chan, cfg.max_bp_iters);
  const std::size_t dim_c = alice.info.size();
  const ToeplitzSeed pa(transcript.pa_seed, dim_c, dim_c - transcript.m1);
  return toeplitz_hash(pa, alice.info).prefix(dim_c - transcript.m1 - transcript.m2);
}

}  // namespace wiretap
