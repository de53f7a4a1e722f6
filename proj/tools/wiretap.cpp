// wiretap: simulate the key distillation protocol and reproduce the rate
// and leaked-information curves.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>

#include "wiretap/estimation.hpp"
#include "wiretap/io.hpp"
#include "wiretap/protocol.hpp"
#include "wiretap/secbounds.hpp"

namespace fs = std::filesystem;
using namespace wiretap;
using nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kAbort = 1, kConfig = 2 };

// --out PATH or stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::ostream& precise(std::ostream& os) { return os << std::setprecision(std::numeric_limits<double>::max_digits10); }

struct SimulateOpts {
  std::string scenario;
  std::size_t runs = 1;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool emit_keys = false;
};

int cmd_simulate(const SimulateOpts& o) {
  const Scenario sc = load_scenario(o.scenario);
  const std::uint64_t base = o.seed.value_or(sc.seed);
  const LinearCode code = load_code(sc.protocol.code);

  std::unique_ptr<std::ofstream> summary_file;
  std::ostream* summary = &std::cout;
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    summary_file = std::make_unique<std::ofstream>(fs::path(o.out) / "summary.csv");
    summary = summary_file.get();
  }
  *summary << "seed,status,key_len,d_bound_log2,iprime_bound_log2\n";
  std::size_t ok = 0;
  for (std::size_t run = 0; run < o.runs; ++run) {
    const std::uint64_t seed = base + run;
    Rng rng(seed);
    const ProtocolOutcome outcome = run_protocol(sc.channel, sc.noise, sc.protocol, code, rng);
    if (outcome.status == Status::Success && !outcome.keys_match())
      std::cerr << "warning: seed " << seed << " passed verification with unequal keys\n";
    ok += outcome.status == Status::Success;
    *summary << seed << ',' << to_string(outcome.status) << ',' << outcome.alice_key.size() << ',';
    if (outcome.has_certificates)
      *summary << precise << outcome.certificates.d.log2_bound << ',' << outcome.certificates.iprime.log2_bound;
    else
      *summary << ',';
    *summary << '\n';
    if (!o.out.empty()) {
      std::ofstream rec(fs::path(o.out) / ("run_" + std::to_string(seed) + ".json"));
      rec << run_record(sc, seed, outcome, o.emit_keys).dump(2) << '\n';
    } else if (o.emit_keys && outcome.status == Status::Success) {
      std::cerr << "seed " << seed << " key " << outcome.alice_key.to_hex() << '\n';
    }
  }
  std::cerr << ok << "/" << o.runs << " runs succeeded\n";
  return ok == o.runs ? kOk : kAbort;
}

struct SampleOpts {
  std::string scenario;
  std::size_t rounds = 100000;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int cmd_sample(const SampleOpts& o) {
  const Scenario sc = load_scenario(o.scenario);
  Rng rng(o.seed.value_or(sc.seed));
  Vector a(static_cast<Eigen::Index>(o.rounds)), b(static_cast<Eigen::Index>(o.rounds));
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const RoundSample r = sample_round(sc.channel, sc.noise, rng);
    a(i) = r.a;
    b(i) = r.b;
  }
  Output out(o.out);
  write_samples_csv(out.stream(), a, b);
  return kOk;
}

struct RateOpts {
  double x_min = 0;
  double x_max = 1;
  std::size_t steps = 101;
  std::string out;
};

int cmd_rate_curve(const RateOpts& o) {
  if (!(o.x_min >= 0 && o.x_min < o.x_max)) throw ConfigError("rate-curve: need 0 <= x-min < x-max");
  if (o.steps < 2) throw ConfigError("rate-curve: need at least 2 steps");
  Output out(o.out);
  auto& os = out.stream();
  os << "x,rate,mi_ab,mi_eb\n" << precise;
  for (std::size_t i = 0; i < o.steps; ++i) {
    const double x = o.x_min + (o.x_max - o.x_min) * static_cast<double>(i) / static_cast<double>(o.steps - 1);
    const KeyRate k = key_rate_typical(x);
    os << x << ',' << k.rate << ',' << k.mi_ab << ',' << k.mi_eb << '\n';
  }
  return kOk;
}

struct BoundOpts {
  std::string scenario;
  double s_min = 0.001;
  double s_max = 0.5;
  std::size_t steps = 500;
  std::optional<std::size_t> m1;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_bound_curve(const BoundOpts& o) {
  if (!(o.s_min > 0 && o.s_min < o.s_max && o.s_max < 1)) throw ConfigError("bound-curve: need 0 < s-min < s-max < 1");
  if (o.steps < 2) throw ConfigError("bound-curve: need at least 2 steps");

  std::optional<PhiHat> ph;
  std::size_t n = 0, m1 = 0;
  if (o.scenario.empty()) {
    // Reference point of the symmetric scenario with v_Y = b^2/5.
    n = 1000000;
    m1 = o.m1.value_or(300000);
    ph.emplace(typical_case_phi_hat(0.2, 500000, 5e-5));
  } else {
    const Scenario sc = load_scenario(o.scenario);
    const ProtocolConfig& cfg = sc.protocol;
    Rng rng(o.seed.value_or(sc.seed));
    Vector a1(static_cast<Eigen::Index>(cfg.l)), b1(a1.size()), a2(a1.size()), b2(a1.size());
    for (Eigen::Index i = 0; i < 2 * a1.size(); ++i) {
      const RoundSample r = sample_round(sc.channel, sc.noise, rng);
      (i < a1.size() ? a1(i) : a2(i - a1.size())) = r.a;
      (i < a1.size() ? b1(i) : b2(i - a1.size())) = r.b;
    }
    const EstimateBundle bundle = residuals(a2, b2, estimate_moments(a1, b1, cfg.epsilon));
    ph.emplace(make_phi_hat(bundle, estimate_eve_cdf(bundle, sc.channel), sc.channel, cfg.epsilon));
    n = cfg.n;
    m1 = o.m1.value_or(0);
    if (!o.m1) m1 = sacrifice_length(*ph, n, cfg.security_target_log2);
  }
  if (m1 > n) throw ConfigError("bound-curve: m1 exceeds n");

  Output out(o.out);
  auto& os = out.stream();
  os << "s,log2_bound\n" << precise;
  double best_s = 0, best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < o.steps; ++i) {
    const double s = o.s_min + (o.s_max - o.s_min) * static_cast<double>(i) / static_cast<double>(o.steps - 1);
    const double value = s * static_cast<double>(n - m1) + static_cast<double>(n) * (*ph)(s) + std::log2(3.0);
    os << s << ',' << value << '\n';
    if (value < best) {
      best = value;
      best_s = s;
    }
  }
  const SecurityCertificate cert = minimize_exponent(*ph, n, m1, Criterion::VariationalDistance);
  std::cerr << "n=" << n << " m1=" << m1 << " grid argmin s=" << best_s << " value=" << best
            << "; solver s*=" << cert.s_star << " log2_bound=" << cert.log2_bound << '\n';
  return kOk;
}

struct EstimateOpts {
  std::string samples;
  double epsilon = 5e-5;
  std::string scenario;
  double b_B = 1.0;
  double a_E = std::sqrt(2.0);
  double b_E = 1.0;
  std::string out;
};

int cmd_estimate(const EstimateOpts& o) {
  if (!(o.epsilon > 0 && o.epsilon < 0.5)) throw ConfigError("estimate: epsilon must lie in (0, 1/2)");
  ChannelParams params{1.0, o.b_B, 0.0, o.a_E, o.b_E};
  if (!o.scenario.empty()) params = load_scenario(o.scenario).channel;
  params.validate();
  const Samples s = read_samples_csv(o.samples);
  if (s.a.size() < 4) throw ConfigError("estimate: need at least 4 sample rows");
  // First half: moments. Second half: residuals.
  const Eigen::Index half = s.a.size() / 2;
  const EstimateBundle bundle =
      residuals(s.a.tail(s.a.size() - half), s.b.tail(s.a.size() - half),
                estimate_moments(s.a.head(half), s.b.head(half), o.epsilon));
  const EveCdf eve = estimate_eve_cdf(bundle, params);
  auto interval = [](Interval i) { return ordered_json::array({i.lo, i.hi}); };
  ordered_json rep = {{"l", bundle.l},
                      {"epsilon", bundle.epsilon},
                      {"z_epsilon", z_epsilon(o.epsilon)},
                      {"e_hat", bundle.e_hat},
                      {"v_hat", bundle.v_hat},
                      {"c_hat", bundle.c_hat},
                      {"v_ab_hat", bundle.v_ab_hat},
                      {"w_hat", bundle.w_hat},
                      {"e_interval", interval(bundle.e_interval())},
                      {"v_interval", interval(bundle.v_interval())},
                      {"c_interval", interval(bundle.c_interval())},
                      {"branch", eve.branch == EveBranch::Prime ? "prime" : "double_prime"},
                      {"smoothing_stdev", eve.smoothing_stdev},
                      {"small_sample", bundle.small_sample()}};
  if (bundle.c_hat != 0) {
    rep["ks_error_bound"] = ks_error_bound(bundle, o.epsilon);
    rep["mi_ab"] = mutual_info_ab(bundle, EmpiricalCdf(bundle.residuals));
  } else {
    rep["ks_error_bound"] = nullptr;
    rep["mi_ab"] = nullptr;
  }
  if (bundle.small_sample()) std::cerr << "warning: fewer than " << kMinReliableSamples << " samples per round\n";
  Output out(o.out);
  out.stream() << rep.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secret key distillation over a Gaussian noise-injecting wiretap channel"};
  app.require_subcommand(1);

  SimulateOpts sim;
  auto add_sim = [](CLI::App* c, SimulateOpts& o) {
    c->add_option("--scenario", o.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    c->add_option("--runs", o.runs, "Number of seeded runs")->check(CLI::PositiveNumber);
    c->add_option("--out", o.out, "Output directory for run records and summary.csv");
    c->add_option("--seed", o.seed, "Base seed (overrides the scenario)");
  };
  auto* simulate = app.add_subcommand("simulate", "Run the protocol; summary CSV plus one JSON record per run");
  add_sim(simulate, sim);
  simulate->add_flag("--emit-keys", sim.emit_keys, "Include raw keys in the run records");
  SimulateOpts keygen_opts;
  auto* keygen = app.add_subcommand("keygen", "simulate with --emit-keys");
  add_sim(keygen, keygen_opts);

  SampleOpts smp;
  auto* sample = app.add_subcommand("sample", "Write channel samples as CSV (a,b)");
  sample->add_option("--scenario", smp.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sample->add_option("--rounds", smp.rounds, "Number of rounds")->check(CLI::PositiveNumber);
  sample->add_option("--seed", smp.seed, "Seed (overrides the scenario)");
  sample->add_option("--out", smp.out, "Output CSV (default stdout)");

  RateOpts rate;
  auto* rate_curve = app.add_subcommand("rate-curve", "Key rate of the symmetric scenario against v_Y/b^2");
  rate_curve->add_option("--x-min", rate.x_min);
  rate_curve->add_option("--x-max", rate.x_max);
  rate_curve->add_option("--steps", rate.steps);
  rate_curve->add_option("--out", rate.out, "Output CSV (default stdout)");

  BoundOpts bound;
  auto* bound_curve = app.add_subcommand("bound-curve", "log2 of the variational-distance bound against s");
  bound_curve->add_option("--scenario", bound.scenario, "Scenario JSON (default: the reference point)")
      ->check(CLI::ExistingFile);
  bound_curve->add_option("--s-min", bound.s_min);
  bound_curve->add_option("--s-max", bound.s_max);
  bound_curve->add_option("--steps", bound.steps);
  bound_curve->add_option("--m1", bound.m1, "Sacrifice length (default: solved from the scenario target)");
  bound_curve->add_option("--seed", bound.seed);
  bound_curve->add_option("--out", bound.out, "Output CSV (default stdout)");

  EstimateOpts est;
  auto* estimate = app.add_subcommand("estimate", "Estimate channel parameters from an a,b sample CSV");
  estimate->add_option("--samples", est.samples, "CSV with header a,b")->required()->check(CLI::ExistingFile);
  estimate->add_option("--epsilon", est.epsilon);
  estimate->add_option("--scenario", est.scenario, "Take b_B, a_E, b_E from this scenario")->check(CLI::ExistingFile);
  estimate->add_option("--b-B", est.b_B);
  estimate->add_option("--a-E", est.a_E);
  estimate->add_option("--b-E", est.b_E);
  estimate->add_option("--out", est.out, "Output JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*keygen) {
      keygen_opts.emit_keys = true;
      return cmd_simulate(keygen_opts);
    }
    if (*sample) return cmd_sample(smp);
    if (*rate_curve) return cmd_rate_curve(rate);
    if (*bound_curve) return cmd_bound_curve(bound);
    if (*estimate) return cmd_estimate(est);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
  return kOk;
}
