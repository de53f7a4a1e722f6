#include "wiretap/estimation.hpp"

#include <numbers>
#include <stdexcept>

namespace wiretap {

double gaussian_quantile(double p) { return normal_quantile(p); }

double z_epsilon(double epsilon) {
  if (!(epsilon > 0 && epsilon < 0.5)) throw std::domain_error("epsilon must lie in (0, 1/2)");
  return normal_quantile(1.0 - epsilon / 2.0);
}

double EstimateBundle::half_width(double variance) const {
  return std::sqrt(std::max(variance, 0.0)) * z_epsilon(epsilon) / std::sqrt(static_cast<double>(l));
}

Interval EstimateBundle::e_interval() const {
  const double h = half_width(v_hat);
  return {e_hat - h, e_hat + h};
}

Interval EstimateBundle::v_interval() const {
  const double h = half_width(w_hat);
  return {v_hat - h, v_hat + h};
}

Interval EstimateBundle::c_interval() const {
  const double h = half_width(v_ab_hat);
  return {c_hat - h, c_hat + h};
}

double EstimateBundle::c_lower() const { return c_hat - half_width(v_ab_hat); }

EstimateBundle estimate_moments(const Vector& a, const Vector& b, double epsilon) {
  if (a.size() != b.size()) throw std::invalid_argument("estimate_moments: a and b differ in length");
  if (a.size() < 2) throw std::invalid_argument("estimate_moments: need at least two samples");
  if (!(epsilon > 0 && epsilon < 0.5)) throw std::domain_error("epsilon must lie in (0, 1/2)");

  const double l = static_cast<double>(a.size());
  EstimateBundle out;
  out.l = static_cast<std::size_t>(a.size());
  out.epsilon = epsilon;
  out.e_hat = b.mean();

  const Vector centered_b = b.array() - out.e_hat;
  const Vector sq = centered_b.array().square();
  out.v_hat = sq.sum() / (l - 1);
  out.w_hat = (sq.array() - out.v_hat).square().sum() / (l - 1);
  out.c_hat = a.dot(centered_b) / l;

  const Vector cross = (a.array() - a.mean()) * centered_b.array();
  out.v_ab_hat = (cross.array() - cross.mean()).square().sum() / (l - 1);
  return out;
}

EstimateBundle residuals(const Vector& a, const Vector& b, EstimateBundle bundle) {
  if (a.size() != b.size()) throw std::invalid_argument("residuals: a and b differ in length");
  if (a.size() == 0) throw std::invalid_argument("residuals: empty second sample");
  const Vector r = b.array() - bundle.c_hat * a.array() - bundle.e_hat;
  bundle.residuals.assign(r.data(), r.data() + r.size());
  std::sort(bundle.residuals.begin(), bundle.residuals.end());
  return bundle;
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("EmpiricalCdf: no points");
  std::sort(points_.begin(), points_.end());
}

double EmpiricalCdf::operator()(double x) const {
  const auto it = std::upper_bound(points_.begin(), points_.end(), x);
  return static_cast<double>(it - points_.begin()) / static_cast<double>(points_.size());
}

double EmpiricalCdf::left_limit(double x) const {
  const auto it = std::lower_bound(points_.begin(), points_.end(), x);
  return static_cast<double>(it - points_.begin()) / static_cast<double>(points_.size());
}

double kolmogorov_cdf(double x) {
  if (!(x > 0) || std::isinf(x)) {
    if (x == std::numeric_limits<double>::infinity()) return 1.0;
    throw std::domain_error("kolmogorov_cdf: x must be positive");
  }
  constexpr int kMaxTerms = 200;
  if (x >= 0.75) {
    double sum = 0;
    for (int k = 1; k <= kMaxTerms; ++k) {
      const double term = std::exp(-2.0 * k * k * x * x);
      sum += (k % 2 == 1) ? term : -term;
      if (term < 1e-17) break;
    }
    return 1.0 - 2.0 * sum;
  }
  // Theta-function form: sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / (8 x^2)).
  const double pi2 = std::numbers::pi * std::numbers::pi;
  double sum = 0;
  for (int k = 1; k <= kMaxTerms; ++k) {
    const double m = 2.0 * k - 1.0;
    const double term = std::exp(-m * m * pi2 / (8.0 * x * x));
    sum += term;
    if (term <= 1e-17 * sum || term == 0) break;
  }
  return std::sqrt(2.0 * std::numbers::pi) / x * sum;
}

double kolmogorov_quantile(double p) {
  if (!(p > 0 && p < 1)) throw std::domain_error("kolmogorov_quantile: p must lie in (0,1)");
  double lo = 1e-3;
  double hi = 1.0;
  while (kolmogorov_cdf(hi) < p) hi *= 2;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SmoothedCdf::SmoothedCdf(EmpiricalCdf base, double stdev) : base_(std::move(base)), stdev_(stdev) {
  if (!(stdev > 0)) throw std::invalid_argument("smoothing stdev must be positive");
}

double SmoothedCdf::operator()(double x) const {
  double s = 0;
  for (double p : base_.points()) s += normal_cdf((x - p) / stdev_);
  return s / static_cast<double>(base_.size());
}

double SmoothedCdf::density(double x) const {
  double s = 0;
  for (double p : base_.points()) s += normal_pdf((x - p) / stdev_);
  return s / (static_cast<double>(base_.size()) * stdev_);
}

SmoothedCdf smooth_cdf(const EmpiricalCdf& ecdf, double stdev) { return SmoothedCdf(ecdf, stdev); }

double EveCdf::operator()(double x) const {
  if (branch == EveBranch::Prime) return SmoothedCdf(base, smoothing_stdev)(x);
  return base(x);
}

double EveCdf::left_limit(double x) const {
  if (branch == EveBranch::Prime) return (*this)(x);
  return base.left_limit(x);
}

EveCdf estimate_eve_cdf(const EstimateBundle& bundle, const ChannelParams& params) {
  if (!bundle.complete()) throw std::invalid_argument("estimate_eve_cdf: bundle has no residuals");
  EveCdf out;
  out.base = EmpiricalCdf(bundle.residuals);
  const double c2 = bundle.c_hat * bundle.c_hat;
  const double smoothing_var =
      c2 * params.a_E * params.a_E / (params.a_E * params.a_E + params.b_E * params.b_E) - params.b_B * params.b_B;
  if (smoothing_var > 0) {
    out.branch = EveBranch::Prime;
    out.smoothing_stdev = std::sqrt(smoothing_var);
  }
  return out;
}

double ks_error_bound(const EstimateBundle& bundle, double epsilon) {
  if (bundle.c_hat == 0) throw std::domain_error("ks_error_bound: c_hat is zero, no correlation signal");
  const double sqrt_l = std::sqrt(static_cast<double>(bundle.l));
  const double z = z_epsilon(epsilon);
  const double first = std::sqrt(bundle.v_ab_hat) * z /
                       (std::sqrt(2.0 * std::numbers::pi * std::numbers::e) * std::abs(bundle.c_hat) * sqrt_l);
  return first + kolmogorov_quantile(1.0 - epsilon) / sqrt_l;
}

double gaussian_sup_distance(double a) {
  if (!(a > 0)) throw std::domain_error("gaussian_sup_distance: a must be positive");
  if (a == 1.0) return 0.0;
  const double outer = std::sqrt(-2.0 * std::log(a) / (1.0 - a * a));
  return std::abs(normal_cdf(a * outer) - normal_cdf(outer));
}

}  // namespace wiretap
