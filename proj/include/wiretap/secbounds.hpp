#ifndef WIRETAP_SECBOUNDS_HPP
#define WIRETAP_SECBOUNDS_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <variant>
#include <vector>

#include "wiretap/estimation.hpp"
#include "wiretap/gaussmodel.hpp"

namespace wiretap {

/// Density P of Eve's reduced variable (centered at Bob's estimated offset).
class EveDistribution {
 public:
  struct AnalyticGaussian {
    double variance;
  };
  struct PointMasses {
    std::vector<double> points;
  };
  struct GaussianMixture {
    std::vector<double> points;
    double stdev;
  };

  static EveDistribution gaussian(double variance);
  static EveDistribution point_masses(std::vector<double> points);
  static EveDistribution mixture(std::vector<double> points, double stdev);
  /// Smoothed branch becomes a mixture, raw branch point masses.
  static EveDistribution from_estimate(const EveCdf& eve);

  const std::variant<AnalyticGaussian, PointMasses, GaussianMixture>& kind() const { return kind_; }

 private:
  explicit EveDistribution(std::variant<AnalyticGaussian, PointMasses, GaussianMixture> k) : kind_(std::move(k)) {}
  std::variant<AnalyticGaussian, PointMasses, GaussianMixture> kind_;
};

/// H[P,v] and phi[P,v](t) for fixed (P, v).
///
/// P is discretized once: point masses exactly, Gaussian and mixture
/// densities by composite 10-point Gauss-Legendre panels no wider than half
/// the narrowest length scale (component stdev, sqrt(v) near the origin),
/// truncated 9 stdevs out. log Phi(x/sqrt v) and log Phi(-x/sqrt v) are
/// cached per node, so each phi(t) is one pass of exp/log1p.
class ExponentModel {
 public:
  ExponentModel(const EveDistribution& dist, double v);

  /// -int [Phi log2 Phi + (1-Phi) log2 (1-Phi)] dP, in [0, 1].
  double entropy() const;
  /// log2 int (Phi^{1/(1-t)} + (1-Phi)^{1/(1-t)})^{1-t} dP for t in [0, 1).
  double phi(double t) const;

  double v() const { return v_; }
  Eigen::Index nodes() const { return weights_.size(); }

 private:
  double v_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd log_p0_;
  Eigen::VectorXd log_p1_;
};

double entropy_H(const EveDistribution& dist, double v);
double phi(const EveDistribution& dist, double v, double t);

/// Shrunk variance fed to phi-hat: on the E' branch
/// c_lower^2 b_E^2/(a_E^2+b_E^2) + b_B^2, on the E'' branch c_lower^2.
/// Throws std::domain_error("insufficient correlation for certification")
/// when c_lower <= 0.
double underline_variance(const EstimateBundle& bundle, const ChannelParams& params, EveBranch branch);

/// t -> phi-hat(C, eps)(t) = log2(2^{phi[P_hat, v_under](t)} + 2 (1 - 2^-t) pad).
class PhiHat {
 public:
  PhiHat(ExponentModel model, double padding) : model_(std::move(model)), padding_(padding) {}

  double operator()(double t) const;
  double padding() const { return padding_; }
  const ExponentModel& model() const { return model_; }

 private:
  ExponentModel model_;
  double padding_;
};

PhiHat make_phi_hat(const EstimateBundle& bundle, const EveCdf& eve, const ChannelParams& params, double epsilon);

double phi_hat(const EstimateBundle& bundle, const EveCdf& eve, const ChannelParams& params, double epsilon,
               double t);

/// phi-hat of the symmetric scenario (a_B = a_E = sqrt(2) b, b_B = b_E = b,
/// Gaussian Y with v_Y = x b^2) with expectations in place of the estimates:
/// c_hat = sqrt(2) b, v_ab_hat = 7 b^2 + v_Y, P = N(0, (4/3 + x) b^2).
PhiHat typical_case_phi_hat(double x, std::size_t l, double epsilon);

enum class Criterion { ModifiedMutualInfo, VariationalDistance };

struct SecurityCertificate {
  Criterion criterion = Criterion::VariationalDistance;
  double s_star = 0;
  double log2_bound = 0;
  std::size_t n = 0;
  std::size_t m1 = 0;
  double padding = 0;
  double underline = 0;  ///< v_under (E' branch) or c_lower^2 (E'' branch)
  double confidence = 1;  ///< 1 - 2 eps when estimate-driven
};

using ExponentFunction = std::function<double(double)>;

/// Variational distance: log2 3 + min_{t in [0,1/2]} t(n - m1) + n phi(t).
/// Modified mutual information: inf_{s in [1e-4, 1-1e-4]} s(n - m1) + n phi(s) - log2 s.
/// Both objectives are convex; the minimizer bisects on the sign of a central
/// difference and falls back to golden-section search when the difference
/// drops below the noise floor.
SecurityCertificate minimize_exponent(const ExponentFunction& phi_fn, std::size_t n, std::size_t m1,
                                      Criterion criterion);

/// Smallest m1 whose variational-distance bound is <= target_log2.
std::size_t sacrifice_length(const ExponentFunction& phi_fn, std::size_t n, double target_log2);

struct KeyRate {
  double rate;
  double mi_ab;
  double mi_eb;
};

/// Asymptotic key rate of the symmetric scenario a_B = a_E = sqrt(2) b,
/// b_B = b_E = b, Gaussian Y, as a function of x = v_Y / b^2.
KeyRate key_rate_typical(double x);

/// I(A; B') with B' the sign of B - e_hat, evaluated exactly for the point-mass
/// residual estimate: P(B'=0 | A=a) = 1 - F(-c_hat a) is piecewise constant in a.
double mutual_info_ab(const EstimateBundle& bundle, const EmpiricalCdf& residuals);

}  // namespace wiretap

#endif  // WIRETAP_SECBOUNDS_HPP
