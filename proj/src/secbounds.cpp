#include "wiretap/secbounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wiretap/normal.hpp"
#include "wiretap/quadrature.hpp"

namespace wiretap {

namespace {

constexpr double kTailStdevs = 9.0;
constexpr double kKernelHalfWidth = 12.0;  // in units of sqrt(v)
constexpr std::size_t kMaxPanels = 40000;

const QuadratureRule<double>& panel_rule() {
  static const QuadratureRule<double> rule = gauss_legendre<double>(10);
  return rule;
}

struct Discretized {
  std::vector<double> x;
  std::vector<double> w;
};

Discretized discretize_gaussian(double variance, double sqrt_v) {
  const double sigma = std::sqrt(variance);
  const auto cuts = graded_cuts(-kTailStdevs * sigma, kTailStdevs * sigma, sigma / 2, -kKernelHalfWidth * sqrt_v,
                                kKernelHalfWidth * sqrt_v, sqrt_v / 2);
  const auto rule = composite_rule(cuts, panel_rule());
  Discretized d;
  d.x.assign(rule.nodes.data(), rule.nodes.data() + rule.size());
  d.w.resize(d.x.size());
  for (std::size_t k = 0; k < d.x.size(); ++k) d.w[k] = rule.weights(static_cast<Eigen::Index>(k)) * normal_pdf(d.x[k] / sigma) / sigma;
  return d;
}

Discretized discretize_points(const std::vector<double>& points) {
  Discretized d;
  d.x = points;
  d.w.assign(points.size(), 1.0 / static_cast<double>(points.size()));
  return d;
}

Discretized discretize_mixture(std::vector<double> points, double a, double sqrt_v) {
  std::sort(points.begin(), points.end());
  const double lo = points.front() - kTailStdevs * a;
  const double hi = points.back() + kTailStdevs * a;
  // A kernel far narrower than the support would need an enormous grid; at
  // that width the mixture is indistinguishable from its point masses.
  if ((hi - lo) / (a / 2) > static_cast<double>(kMaxPanels)) return discretize_points(points);

  const auto cuts = graded_cuts(lo, hi, a / 2, -kKernelHalfWidth * sqrt_v, kKernelHalfWidth * sqrt_v, sqrt_v / 2);
  const auto rule = composite_rule(cuts, panel_rule());
  const double norm = 1.0 / (static_cast<double>(points.size()) * a * std::sqrt(2.0 * std::numbers::pi));
  Discretized d;
  d.x.assign(rule.nodes.data(), rule.nodes.data() + rule.size());
  d.w.resize(d.x.size());
  for (std::size_t k = 0; k < d.x.size(); ++k) {
    const double x = d.x[k];
    auto first = std::lower_bound(points.begin(), points.end(), x - kTailStdevs * a);
    auto last = std::upper_bound(first, points.end(), x + kTailStdevs * a);
    double density = 0;
    for (auto it = first; it != last; ++it) {
      const double z = (x - *it) / a;
      density += std::exp(-0.5 * z * z);
    }
    d.w[k] = rule.weights(static_cast<Eigen::Index>(k)) * density * norm;
  }
  return d;
}

double binary_entropy_from_logs(double log_p0, double log_p1) {
  const double p0 = std::exp(log_p0);
  const double p1 = std::exp(log_p1);
  return -(p0 * log_p0 + p1 * log_p1) / std::numbers::ln2;
}

}  // namespace

EveDistribution EveDistribution::gaussian(double variance) {
  if (!(variance > 0) || !std::isfinite(variance)) throw std::invalid_argument("Gaussian variance must be positive");
  return EveDistribution(AnalyticGaussian{variance});
}

EveDistribution EveDistribution::point_masses(std::vector<double> points) {
  if (points.empty()) throw std::invalid_argument("point masses: no points");
  return EveDistribution(PointMasses{std::move(points)});
}

EveDistribution EveDistribution::mixture(std::vector<double> points, double stdev) {
  if (points.empty()) throw std::invalid_argument("mixture: no points");
  if (!(stdev > 0)) throw std::invalid_argument("mixture: stdev must be positive");
  return EveDistribution(GaussianMixture{std::move(points), stdev});
}

EveDistribution EveDistribution::from_estimate(const EveCdf& eve) {
  if (eve.branch == EveBranch::Prime) return mixture(eve.base.points(), eve.smoothing_stdev);
  return point_masses(eve.base.points());
}

ExponentModel::ExponentModel(const EveDistribution& dist, double v) : v_(v) {
  if (!(v > 0) || !std::isfinite(v)) throw std::domain_error("exponent model: v must be positive and finite");
  const double sqrt_v = std::sqrt(v);
  struct Visitor {
    double sqrt_v;
    Discretized operator()(const EveDistribution::AnalyticGaussian& g) const {
      return discretize_gaussian(g.variance, sqrt_v);
    }
    Discretized operator()(const EveDistribution::PointMasses& p) const { return discretize_points(p.points); }
    Discretized operator()(const EveDistribution::GaussianMixture& m) const {
      return discretize_mixture(m.points, m.stdev, sqrt_v);
    }
  };
  const Discretized d = std::visit(Visitor{sqrt_v}, dist.kind());

  const auto size = static_cast<Eigen::Index>(d.x.size());
  weights_ = Eigen::Map<const Eigen::VectorXd>(d.w.data(), size);
  weights_ /= weights_.sum();
  log_p0_.resize(size);
  log_p1_.resize(size);
  for (Eigen::Index k = 0; k < size; ++k) {
    const double z = d.x[static_cast<std::size_t>(k)] / sqrt_v;
    log_p0_(k) = log_normal_cdf(z);
    log_p1_(k) = log_normal_cdf(-z);
  }
}

double ExponentModel::entropy() const {
  double h = 0;
  for (Eigen::Index k = 0; k < weights_.size(); ++k) h += weights_(k) * binary_entropy_from_logs(log_p0_(k), log_p1_(k));
  return std::clamp(h, 0.0, 1.0);
}

double ExponentModel::phi(double t) const {
  if (!(t >= 0 && t < 1)) throw std::domain_error("phi: t must lie in [0, 1)");
  if (t == 0) return 0.0;
  const double r = 1.0 / (1.0 - t);
  double sum = 0;
  for (Eigen::Index k = 0; k < weights_.size(); ++k) {
    const double hi = std::max(log_p0_(k), log_p1_(k));
    const double lo = std::min(log_p0_(k), log_p1_(k));
    // (p0^r + p1^r)^(1-t) = p_max * (1 + (p_min/p_max)^r)^(1-t)
    sum += weights_(k) * std::exp(hi + (1.0 - t) * std::log1p(std::exp(r * (lo - hi))));
  }
  return std::min(std::log2(sum), 0.0);
}

double entropy_H(const EveDistribution& dist, double v) { return ExponentModel(dist, v).entropy(); }

double phi(const EveDistribution& dist, double v, double t) { return ExponentModel(dist, v).phi(t); }

double underline_variance(const EstimateBundle& bundle, const ChannelParams& params, EveBranch branch) {
  const double c_low = bundle.c_lower();
  if (!(c_low > 0)) throw std::domain_error("insufficient correlation for certification");
  if (branch == EveBranch::DoublePrime) return c_low * c_low;
  return c_low * c_low * params.b_E * params.b_E / (params.a_E * params.a_E + params.b_E * params.b_E) +
         params.b_B * params.b_B;
}

double PhiHat::operator()(double t) const {
  if (t == 0) return 0.0;
  const double base = std::exp2(model_.phi(t));
  return std::log2(base + 2.0 * (1.0 - std::exp2(-t)) * padding_);
}

PhiHat make_phi_hat(const EstimateBundle& bundle, const EveCdf& eve, const ChannelParams& params, double epsilon) {
  const double v = underline_variance(bundle, params, eve.branch);
  return PhiHat(ExponentModel(EveDistribution::from_estimate(eve), v), ks_error_bound(bundle, epsilon));
}

double phi_hat(const EstimateBundle& bundle, const EveCdf& eve, const ChannelParams& params, double epsilon,
               double t) {
  return make_phi_hat(bundle, eve, params, epsilon)(t);
}

PhiHat typical_case_phi_hat(double x, std::size_t l, double epsilon) {
  if (!(x >= 0) || l == 0) throw std::domain_error("typical_case_phi_hat: need x >= 0 and l >= 1");
  const double z = z_epsilon(epsilon);
  const double root_l = std::sqrt(static_cast<double>(l));
  const double c = std::sqrt(2.0);
  const double v_ab = 7.0 + x;
  const double c_low = c - std::sqrt(v_ab) * z / root_l;
  if (c_low <= 0) throw std::domain_error("insufficient correlation for certification");
  const double v_under = c_low * c_low / 3.0 + 1.0;
  const double pad = std::sqrt(v_ab) * z / (std::sqrt(2.0 * std::numbers::pi * std::numbers::e) * c * root_l) +
                     kolmogorov_quantile(1.0 - epsilon) / root_l;
  return PhiHat(ExponentModel(EveDistribution::gaussian(4.0 / 3.0 + x), v_under), pad);
}

namespace {

constexpr double kStep = 1e-6;
constexpr double kTolerance = 1e-6;
constexpr double kNoiseFloor = 1e-12;

double checked(double value) {
  if (!std::isfinite(value)) throw std::domain_error("exponent function returned a non-finite value");
  return value;
}

double golden_section(const std::function<double(double)>& g, double a, double b) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double gc = checked(g(c));
  double gd = checked(g(d));
  while (b - a > kTolerance) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = checked(g(c));
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = checked(g(d));
    }
  }
  return 0.5 * (a + b);
}

/// Minimizer of a convex g on [lo, hi].
double convex_argmin(const std::function<double(double)>& g, double lo, double hi) {
  // Sign of the slope at x, or 0 when the difference is below the noise floor.
  auto slope = [&](double x) {
    const double left = std::max(lo, x - kStep);
    const double right = std::min(hi, x + kStep);
    const double diff = checked(g(right)) - checked(g(left));
    if (std::abs(diff) < kNoiseFloor) return 0;
    return diff > 0 ? 1 : -1;
  };
  const int at_lo = slope(lo);
  if (at_lo > 0) return lo;
  const int at_hi = slope(hi);
  if (at_hi < 0) return hi;
  if (at_lo == 0 || at_hi == 0) return golden_section(g, lo, hi);
  double a = lo;
  double b = hi;
  while (b - a > kTolerance) {
    const double mid = 0.5 * (a + b);
    const int s = slope(mid);
    if (s == 0) return golden_section(g, a, b);
    (s > 0 ? b : a) = mid;
  }
  return 0.5 * (a + b);
}

}  // namespace

SecurityCertificate minimize_exponent(const ExponentFunction& phi_fn, std::size_t n, std::size_t m1,
                                      Criterion criterion) {
  if (m1 > n) throw std::invalid_argument("minimize_exponent: m1 exceeds n");
  const double nn = static_cast<double>(n);
  const double keep = static_cast<double>(n - m1);
  SecurityCertificate cert;
  cert.criterion = criterion;
  cert.n = n;
  cert.m1 = m1;
  if (criterion == Criterion::VariationalDistance) {
    auto g = [&](double t) { return t * keep + nn * phi_fn(t); };
    cert.s_star = convex_argmin(g, 0.0, 0.5);
    cert.log2_bound = std::log2(3.0) + checked(g(cert.s_star));
  } else {
    auto g = [&](double s) { return s * keep + nn * phi_fn(s) - std::log2(s); };
    cert.s_star = convex_argmin(g, 1e-4, 1.0 - 1e-4);
    cert.log2_bound = checked(g(cert.s_star));
  }
  return cert;
}

std::size_t sacrifice_length(const ExponentFunction& phi_fn, std::size_t n, double target_log2) {
  auto bound = [&](std::size_t m1) {
    return minimize_exponent(phi_fn, n, m1, Criterion::VariationalDistance).log2_bound;
  };
  if (bound(n) > target_log2) throw std::domain_error("sacrifice_length: target unreachable even with m1 = n");
  std::size_t lo = 0;
  std::size_t hi = n;
  if (bound(lo) <= target_log2) return lo;
  // bound(lo) > target >= bound(hi)
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (bound(mid) <= target_log2 ? hi : lo) = mid;
  }
  return hi;
}

KeyRate key_rate_typical(double x) {
  if (!(x >= 0)) throw std::domain_error("key_rate_typical: x must be non-negative");
  const auto standard = EveDistribution::gaussian(1.0);
  const double h_ab = entropy_H(standard, (1.0 + x) / 2.0);
  const double h_eb = entropy_H(standard, 5.0 / (4.0 + 3.0 * x));
  return {h_eb - h_ab, 1.0 - h_ab, 1.0 - h_eb};
}

double mutual_info_ab(const EstimateBundle& bundle, const EmpiricalCdf& residuals) {
  if (bundle.c_hat == 0) throw std::domain_error("mutual_info_ab: c_hat is zero, no correlation");
  const auto& r = residuals.points();
  const double l = static_cast<double>(r.size());
  // B' = 0 iff r > -c a. For c > 0 that is a > -r/c, so P(B'=0|a) counts the
  // thresholds below a; for c < 0 it counts those above.
  std::vector<double> thresholds(r.size());
  std::transform(r.begin(), r.end(), thresholds.begin(), [&](double ri) { return -ri / bundle.c_hat; });
  std::sort(thresholds.begin(), thresholds.end());
  const bool increasing = bundle.c_hat > 0;

  auto h2 = [](double p) {
    if (p <= 0 || p >= 1) return 0.0;
    return -(p * std::log2(p) + (1 - p) * std::log2(1 - p));
  };
  double cond = 0;
  double p0 = 0;
  double prev_cdf = 0;
  for (std::size_t i = 0; i <= thresholds.size(); ++i) {
    const double cdf = i < thresholds.size() ? normal_cdf(thresholds[i]) : 1.0;
    const double mass = cdf - prev_cdf;
    const double below = static_cast<double>(i) / l;
    const double q = increasing ? below : 1.0 - below;
    cond += mass * h2(q);
    p0 += mass * q;
    prev_cdf = cdf;
  }
  return std::clamp(h2(p0) - cond, 0.0, 1.0);
}

}  // namespace wiretap
