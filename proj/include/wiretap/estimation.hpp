#ifndef WIRETAP_ESTIMATION_HPP
#define WIRETAP_ESTIMATION_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "wiretap/gaussmodel.hpp"
#include "wiretap/normal.hpp"

namespace wiretap {

using Vector = Eigen::VectorXd;

/// Below this many samples the Gaussian approximation behind the confidence
/// intervals is questionable; estimates are still produced.
inline constexpr std::size_t kMinReliableSamples = 10000;

struct Interval {
  double lo;
  double hi;
  bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Moment estimates of one estimation round plus the sorted residuals
/// B - c_hat A - e_hat of the second round.
struct EstimateBundle {
  double e_hat = 0;     ///< sample mean of B
  double v_hat = 0;     ///< unbiased variance of B
  double c_hat = 0;     ///< sample mean of A (B - e_hat)
  double v_ab_hat = 0;  ///< unbiased variance of (A - mean A)(B - e_hat)
  double w_hat = 0;     ///< unbiased variance of (B - e_hat)^2
  std::size_t l = 0;
  double epsilon = 0;
  std::vector<double> residuals;

  /// Z_eps sqrt(var) / sqrt(l)
  double half_width(double variance) const;
  Interval e_interval() const;
  Interval v_interval() const;
  Interval c_interval() const;
  /// Lower confidence end of c_AB: c_hat - sqrt(v_ab_hat) Z_eps / sqrt(l).
  double c_lower() const;
  bool small_sample() const { return l < kMinReliableSamples; }
  bool complete() const { return !residuals.empty(); }
};

/// Phi^-1(p).
double gaussian_quantile(double p);

/// Z_eps = Phi^-1(1 - eps/2), the percent point used for every interval.
double z_epsilon(double epsilon);

/// Throws unless l >= 2 and 0 < epsilon < 1/2.
EstimateBundle estimate_moments(const Vector& a, const Vector& b, double epsilon);

/// Fills bundle.residuals from an independent second sample.
EstimateBundle residuals(const Vector& a, const Vector& b, EstimateBundle bundle);

/// Right-continuous empirical CDF.
class EmpiricalCdf {
 public:
  EmpiricalCdf() = default;
  explicit EmpiricalCdf(std::vector<double> points);

  double operator()(double x) const;
  double left_limit(double x) const;

  const std::vector<double>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<double> points_;
};

/// L(x) = 1 - 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_cdf(double x);
double kolmogorov_quantile(double p);

/// G_a[F](x) = (1/l) sum_i Phi((x - p_i)/a), the convolution of a step CDF with N(0, a^2).
class SmoothedCdf {
 public:
  SmoothedCdf(EmpiricalCdf base, double stdev);

  double operator()(double x) const;
  double density(double x) const;
  double stdev() const { return stdev_; }
  const EmpiricalCdf& base() const { return base_; }

 private:
  EmpiricalCdf base_;
  double stdev_;
};

SmoothedCdf smooth_cdf(const EmpiricalCdf& ecdf, double stdev);

enum class EveBranch { Prime, DoublePrime };

/// Estimate of Eve's reduced variable: smoothed residual CDF (E') when the
/// smoothing variance c_hat^2 a_E^2/(a_E^2+b_E^2) - b_B^2 is positive,
/// the raw residual CDF (E'') otherwise.
struct EveCdf {
  EveBranch branch = EveBranch::DoublePrime;
  EmpiricalCdf base;
  double smoothing_stdev = 0;

  double operator()(double x) const;
  double left_limit(double x) const;
};

EveCdf estimate_eve_cdf(const EstimateBundle& bundle, const ChannelParams& params);

namespace detail {
template <typename F>
double left_limit_of(const F& f, double x) {
  if constexpr (requires { f.left_limit(x); })
    return f.left_limit(x);
  else
    return f(x);
}
}  // namespace detail

/// sup_x |F(x) - G(x)| for an empirical G, evaluated exactly at the jumps of G
/// (and the left limits there). F may itself be a step function exposing
/// `left_limit`; otherwise it is taken as continuous.
template <typename F>
double ks_distance(const F& cdf, const EmpiricalCdf& g) {
  const auto& pts = g.points();
  const double l = static_cast<double>(pts.size());
  double sup = 0;
  std::size_t i = 0;
  while (i < pts.size()) {
    std::size_t j = i;
    while (j < pts.size() && pts[j] == pts[i]) ++j;
    const double before = static_cast<double>(i) / l;
    const double after = static_cast<double>(j) / l;
    sup = std::max(sup, std::abs(detail::left_limit_of(cdf, pts[i]) - before));
    sup = std::max(sup, std::abs(cdf(pts[i]) - after));
    i = j;
  }
  return sup;
}

/// Confidence-level padding on sup|F_E - F_E_hat|:
/// sqrt(v_ab) Z_eps / (sqrt(2 pi e) c_hat sqrt(l)) + L^-1(1 - eps)/sqrt(l).
double ks_error_bound(const EstimateBundle& bundle, double epsilon);

/// sup_x |Phi(x) - Phi(x/a)| in closed form.
double gaussian_sup_distance(double a);

}  // namespace wiretap

#endif  // WIRETAP_ESTIMATION_HPP
