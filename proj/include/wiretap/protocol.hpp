#ifndef WIRETAP_PROTOCOL_HPP
#define WIRETAP_PROTOCOL_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "wiretap/estimation.hpp"
#include "wiretap/gaussmodel.hpp"
#include "wiretap/hashing.hpp"
#include "wiretap/reconciliation.hpp"
#include "wiretap/secbounds.hpp"

namespace wiretap {

/// Where the reconciliation code comes from: an alist file when `alist_path`
/// is set, otherwise a seeded regular Gallager code.
struct CodeSpec {
  std::string alist_path;
  std::size_t n_code = 4096;
  std::size_t wc = 3;
  std::size_t wr = 4;
  std::uint64_t seed = 1;
};

LinearCode load_code(const CodeSpec& spec);

struct ProtocolConfig {
  std::size_t n = 16384;  ///< distillation rounds, a multiple of the code length
  std::size_t l = 10000;  ///< rounds per estimation step
  double epsilon = 5e-5;
  double security_target_log2 = -40;
  std::size_t m2 = 64;
  CodeSpec code;
  std::size_t k_auth = 0;       ///< authentication key bits (accounting only)
  bool subtract_auth = false;   ///< charge k_auth against the net key length
  bool post_selection = true;
  int max_bp_iters = 60;
  std::size_t fault_flips = 0;  ///< bits of Alice's decoded data flipped before hashing
  bool record_eve_view = false;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// Everything sent over the public channel.
struct Transcript {
  std::uint64_t sampling_seed = 0;
  Vector est1_a, est1_b;  ///< first estimation round (moments)
  Vector est2_a, est2_b;  ///< second estimation round (residuals)
  double e_hat = 0;
  double v_hat = 0;
  double c_hat = 0;
  BitString alpha;        ///< coset representatives, concatenated over blocks
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  BitString pa_seed;
  BitString verify_seed;
  BitString alice_tag;
  BitString bob_tag;
};

enum class Status { Success, VerificationFailed, Aborted };

enum class AbortReason {
  None,
  PostSelection,
  InsufficientCorrelation,
  RateExceedsCapacity,
  TargetUnreachable,
  NoKeyLeft,
  CodeMismatch,
};

std::string to_string(Status status);
std::string to_string(AbortReason reason);

struct CertificatePair {
  SecurityCertificate iprime;
  SecurityCertificate d;
};

struct ProtocolOutcome {
  Status status = Status::Aborted;
  AbortReason abort_reason = AbortReason::None;
  std::string detail;
  BitString alice_key;
  BitString bob_key;
  bool has_certificates = false;
  CertificatePair certificates;
  Transcript transcript;
  EstimateBundle bundle;
  EveBranch branch = EveBranch::DoublePrime;
  double mi_ab_estimate = 0;
  std::size_t dim_c = 0;
  std::size_t blocks = 0;
  std::size_t blocks_converged = 0;
  double auth_failure = 0;
  std::size_t net_key_length = 0;
  std::vector<double> eve_e;  ///< Eve's observation per round (audit only)
  std::vector<double> eve_y;

  bool keys_match() const { return alice_key == bob_key; }
};

/// Public-coin split of rounds 0..n+2l-1 into two estimation sets of size l
/// and the n distillation rounds; each set in ascending round order.
struct RoundPartition {
  std::vector<std::size_t> est1;
  std::vector<std::size_t> est2;
  std::vector<std::size_t> distill;
};

RoundPartition partition_rounds(std::size_t n, std::size_t l, std::uint64_t seed);

/// Advantage condition evaluated at the shrunk correlation c_lower and
/// v_Y := max(0, v_hat - c_hat^2 - b_B^2).
bool post_selection_gate(const EstimateBundle& bundle, const ChannelParams& params);

/// Both leaked-information certificates at the transcript's m1.
CertificatePair certify(const Transcript& transcript, const EstimateBundle& bundle, const EveCdf& eve,
                        const ChannelParams& params, const ProtocolConfig& cfg);

ProtocolOutcome run_protocol(const ChannelParams& params, const NoiseSpec& noise, const ProtocolConfig& cfg,
                             const LinearCode& code, Rng& rng);
ProtocolOutcome run_protocol(const ChannelParams& params, const NoiseSpec& noise, const ProtocolConfig& cfg,
                             Rng& rng);

/// Alice's final key recomputed from her symbols of all n+2l rounds and the
/// public transcript alone.
BitString alice_key_from_transcript(const Vector& alice_a, const Transcript& transcript, const ProtocolConfig& cfg,
                                    const LinearCode& code);

}  // namespace wiretap

#endif  // WIRETAP_PROTOCOL_HPP
