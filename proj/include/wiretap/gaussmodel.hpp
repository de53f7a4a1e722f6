#ifndef WIRETAP_GAUSSMODEL_HPP
#define WIRETAP_GAUSSMODEL_HPP

// Channel model for the noise-injecting wiretap setting:
//
//   B = a_B A + Y + b_B X1 + e_B      (Bob)
//   E = a_E A + b_E X2                (Eve, who also knows Y)
//
// with A, X1, X2 independent standard Gaussians and Y an independent
// zero-mean injected noise. Everything Eve learns about B from (E, Y)
// collapses to the scalar E' = a_B a_E/(a_E^2+b_E^2) E + Y, given which B is
// Gaussian with mean E' + e_B and variance v_{B|E'}.
//
// A second reduction, E'', lets Eve additionally know an auxiliary Gaussian;
// its distribution coincides with that of the residual B - a_B A - e_B, which
// is what makes it estimable when b_B^2 dominates. Neither F nor the
// auxiliary variables are ever materialized.
//
// Interference-type channels (several transmitters sharing the medium)
// reduce to this same model by treating the other transmitter's symbol as
// part of Y; there is no separate code path for them.

#include <random>
#include <span>
#include <variant>
#include <vector>

namespace wiretap {

using Rng = std::mt19937_64;

struct ChannelParams {
  double a_B = 1.0;  ///< Bob attenuation (sign is irrelevant)
  double b_B = 1.0;  ///< Bob detector noise stdev
  double e_B = 0.0;  ///< Bob offset
  double a_E = 1.0;  ///< Eve attenuation, an upper bound over possible values
  double b_E = 1.0;  ///< Eve detector noise stdev

  /// Throws std::invalid_argument unless b_B, b_E, a_E are positive and all fields finite.
  void validate() const;
};

/// Distribution of the injected noise Y. Always zero mean.
class NoiseSpec {
 public:
  struct Gaussian {
    double variance = 0.0;
  };
  struct Component {
    double weight;
    double mean;
    double stdev;
  };
  struct Mixture {
    std::vector<Component> components;
  };
  struct Empirical {
    std::vector<double> values;
  };

  NoiseSpec() = default;

  static NoiseSpec gaussian(double variance);
  /// Weights must sum to one and the overall mean must be zero.
  static NoiseSpec mixture(std::vector<Component> components);
  /// Values are centered on construction.
  static NoiseSpec empirical(std::vector<double> values);

  /// Exact second moment v_Y of the specified distribution.
  double variance() const;
  double sample(Rng& rng) const;

  const std::variant<Gaussian, Mixture, Empirical>& kind() const { return kind_; }

 private:
  explicit NoiseSpec(std::variant<Gaussian, Mixture, Empirical> kind) : kind_(std::move(kind)) {}

  std::variant<Gaussian, Mixture, Empirical> kind_{Gaussian{}};
};

struct RoundSample {
  double a;
  double b;
  double e;
  double y;
};

/// Builds one round from explicit draws of A, X1, X2 and Y.
RoundSample compose_round(const ChannelParams& params, double a, double x1, double x2, double y);

/// Draws A, X1, X2 ~ N(0,1) and Y from `noise`, in that order.
RoundSample sample_round(const ChannelParams& params, const NoiseSpec& noise, Rng& rng);

struct EveReduced {
  double e_prime;
  double v_cond;       ///< v_{B|E'}
  double mean_offset;  ///< e' + e_B
};

/// v_{B|E'} = a_B^2 b_E^2/(a_E^2+b_E^2) + b_B^2
double conditional_variance(const ChannelParams& params);

EveReduced reduce_eprime(const ChannelParams& params, double e, double y);

struct Correlations {
  double rho_A_sq;
  double rho_Eprime_sq;
  double rho_Edprime_sq;
};

Correlations rho_squared(const ChannelParams& params, double v_Y);

/// a_B^2 / v_Y > a_E^2 / b_E^2 + 1, with a_B^2/0 read as +infinity.
bool advantage_condition(const ChannelParams& params, double v_Y);

struct AntennaGain {
  double a;
  double b;
};

/// Collapses k receive antennas E_j = a_j A + b_j X_j into one equivalent
/// antenna. The summed statistic sum_j E_j/a_j is rescaled to the smallest
/// attenuation, so k identical antennas (a, b) become (a, b/sqrt(k)).
AntennaGain reduce_multi_antenna(std::span<const AntennaGain> antennas);

struct ComplexChannel {
  double a_B, b_B, e_B, a_E, b_E;  // magnitudes
  double theta_B = 0, theta_E = 0, theta_Y = 0;
  double theta_1 = 0, theta_2 = 0, theta_3 = 0;
};

/// Two independent real channels obtained after de-rotating B by theta_B and E by theta_E.
struct RealChannelPair {
  ChannelParams real;
  ChannelParams imag;
};

RealChannelPair reduce_complex(const ComplexChannel& channel);

}  // namespace wiretap

#endif  // WIRETAP_GAUSSMODEL_HPP
