#include "wiretap/gaussmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace wiretap {

void ChannelParams::validate() const {
  for (double v : {a_B, b_B, e_B, a_E, b_E})
    if (!std::isfinite(v)) throw std::invalid_argument("channel parameters must be finite");
  if (!(b_B > 0)) throw std::invalid_argument("b_B must be positive");
  if (!(b_E > 0)) throw std::invalid_argument("b_E must be positive");
  if (!(a_E > 0)) throw std::invalid_argument("a_E must be positive");
}

NoiseSpec NoiseSpec::gaussian(double variance) {
  if (!(variance >= 0) || !std::isfinite(variance))
    throw std::invalid_argument("Gaussian noise variance must be finite and non-negative");
  return NoiseSpec(Gaussian{variance});
}

NoiseSpec NoiseSpec::mixture(std::vector<Component> components) {
  if (components.empty()) throw std::invalid_argument("mixture needs at least one component");
  double total = 0;
  double mean = 0;
  for (const auto& c : components) {
    if (!(c.weight >= 0) || !(c.stdev >= 0) || !std::isfinite(c.mean) || !std::isfinite(c.stdev))
      throw std::invalid_argument("mixture components need weight >= 0, finite mean and stdev >= 0");
    total += c.weight;
    mean += c.weight * c.mean;
  }
  if (std::abs(total - 1) > 1e-9) throw std::invalid_argument("mixture weights must sum to 1");
  if (std::abs(mean) > 1e-9) throw std::invalid_argument("mixture mean must be 0");
  return NoiseSpec(Mixture{std::move(components)});
}

NoiseSpec NoiseSpec::empirical(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("empirical noise needs at least one value");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("empirical noise values must be finite");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  for (double& v : values) v -= mean;
  return NoiseSpec(Empirical{std::move(values)});
}

double NoiseSpec::variance() const {
  struct Visitor {
    double operator()(const Gaussian& g) const { return g.variance; }
    double operator()(const Mixture& m) const {
      double s = 0;
      for (const auto& c : m.components) s += c.weight * (c.stdev * c.stdev + c.mean * c.mean);
      return s;
    }
    double operator()(const Empirical& e) const {
      double s = 0;
      for (double v : e.values) s += v * v;
      return s / static_cast<double>(e.values.size());
    }
  };
  return std::visit(Visitor{}, kind_);
}

double NoiseSpec::sample(Rng& rng) const {
  std::normal_distribution<double> normal;
  if (const auto* g = std::get_if<Gaussian>(&kind_)) return std::sqrt(g->variance) * normal(rng);
  if (const auto* m = std::get_if<Mixture>(&kind_)) {
    std::uniform_real_distribution<double> unit;
    double u = unit(rng);
    const Component* pick = &m->components.back();
    for (const auto& c : m->components) {
      if (u < c.weight) {
        pick = &c;
        break;
      }
      u -= c.weight;
    }
    return pick->mean + pick->stdev * normal(rng);
  }
  const auto& values = std::get<Empirical>(kind_).values;
  std::uniform_int_distribution<std::size_t> index(0, values.size() - 1);
  return values[index(rng)];
}

RoundSample compose_round(const ChannelParams& p, double a, double x1, double x2, double y) {
  return {a, p.a_B * a + y + p.b_B * x1 + p.e_B, p.a_E * a + p.b_E * x2, y};
}

RoundSample sample_round(const ChannelParams& params, const NoiseSpec& noise, Rng& rng) {
  std::normal_distribution<double> normal;
  const double a = normal(rng);
  const double x1 = normal(rng);
  const double x2 = normal(rng);
  const double y = noise.sample(rng);
  return compose_round(params, a, x1, x2, y);
}

double conditional_variance(const ChannelParams& p) {
  return p.a_B * p.a_B * p.b_E * p.b_E / (p.a_E * p.a_E + p.b_E * p.b_E) + p.b_B * p.b_B;
}

EveReduced reduce_eprime(const ChannelParams& p, double e, double y) {
  const double e_prime = p.a_B * p.a_E / (p.a_E * p.a_E + p.b_E * p.b_E) * e + y;
  return {e_prime, conditional_variance(p), e_prime + p.e_B};
}

Correlations rho_squared(const ChannelParams& p, double v_Y) {
  if (!(v_Y >= 0)) throw std::invalid_argument("v_Y must be non-negative");
  const double total = p.a_B * p.a_B + v_Y + p.b_B * p.b_B;
  const double eve_power = p.a_E * p.a_E + p.b_E * p.b_E;
  if (!(total > 0) || !(eve_power > 0)) throw std::invalid_argument("rho_squared: degenerate channel parameters");
  const double a_B2 = p.a_B * p.a_B;
  return {a_B2 / total, (a_B2 * p.a_E * p.a_E / eve_power + v_Y) / total, (v_Y + p.b_B * p.b_B) / total};
}

bool advantage_condition(const ChannelParams& p, double v_Y) {
  if (!(v_Y >= 0)) throw std::invalid_argument("v_Y must be non-negative");
  // a_B^2/v_Y > a_E^2/b_E^2 + 1, cleared of denominators.
  return p.a_B * p.a_B * p.b_E * p.b_E > v_Y * (p.a_E * p.a_E + p.b_E * p.b_E);
}

AntennaGain reduce_multi_antenna(std::span<const AntennaGain> antennas) {
  if (antennas.empty()) throw std::invalid_argument("reduce_multi_antenna: no antennas");
  double ratio_power = 0;
  double a_ref = antennas.front().a;
  for (const auto& ant : antennas) {
    if (!(ant.a > 0) || !(ant.b > 0)) throw std::invalid_argument("antenna gains must be positive");
    ratio_power += (ant.b / ant.a) * (ant.b / ant.a);
    a_ref = std::min(a_ref, ant.a);
  }
  const double k = static_cast<double>(antennas.size());
  // sum_j E_j/a_j / k = A + sqrt(ratio_power)/k X
  return {a_ref, a_ref * std::sqrt(ratio_power) / k};
}

RealChannelPair reduce_complex(const ComplexChannel& c) {
  for (double m : {c.a_B, c.b_B, c.a_E, c.b_E})
    if (!(m > 0)) throw std::invalid_argument("reduce_complex: magnitudes must be positive");
  const double rel = c.theta_3 - c.theta_B;
  ChannelParams base{c.a_B, c.b_B, 0.0, c.a_E, c.b_E};
  RealChannelPair out{base, base};
  out.real.e_B = c.e_B * std::cos(rel);
  out.imag.e_B = c.e_B * std::sin(rel);
  return out;
}

}  // namespace wiretap
