#ifndef WIRETAP_QUADRATURE_HPP
#define WIRETAP_QUADRATURE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace wiretap {

/// Nodes and weights of an interpolatory quadrature rule.
template <typename Scalar>
struct QuadratureRule {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;

  Eigen::Index size() const { return nodes.size(); }
};

/// Gauss-Legendre rule on [-1, 1] by Golub-Welsch: eigenvalues of the
/// symmetric Jacobi matrix are the nodes, squared first eigenvector
/// components (times the total mass 2) are the weights.
template <typename Scalar>
QuadratureRule<Scalar> gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix jacobi = Matrix::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const Scalar kk = Scalar(k);
    const Scalar beta = kk / std::sqrt(Scalar(4) * kk * kk - Scalar(1));
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
  QuadratureRule<Scalar> rule;
  rule.nodes = solver.eigenvalues();
  rule.weights = Scalar(2) * solver.eigenvectors().row(0).transpose().array().square();
  return rule;
}

/// Composite Gauss-Legendre rule over consecutive panels [cuts[i], cuts[i+1]].
/// Cuts must be sorted; zero-width panels are skipped.
template <typename Scalar>
QuadratureRule<Scalar> composite_rule(const std::vector<Scalar>& cuts, const QuadratureRule<Scalar>& base) {
  std::vector<Scalar> x;
  std::vector<Scalar> w;
  x.reserve(cuts.size() * static_cast<std::size_t>(base.size()));
  w.reserve(x.capacity());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Scalar half = (cuts[i + 1] - cuts[i]) / 2;
    if (!(half > 0)) continue;
    const Scalar mid = (cuts[i + 1] + cuts[i]) / 2;
    for (Eigen::Index k = 0; k < base.size(); ++k) {
      x.push_back(mid + half * base.nodes(k));
      w.push_back(half * base.weights(k));
    }
  }
  QuadratureRule<Scalar> rule;
  rule.nodes = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(x.data(), static_cast<Eigen::Index>(x.size()));
  rule.weights = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(w.data(), static_cast<Eigen::Index>(w.size()));
  return rule;
}

/// Panel cuts covering [lo, hi] with spacing at most `coarse`, refined to at most
/// `fine` inside [fine_lo, fine_hi]. Used to resolve a narrow feature (e.g. a
/// sharp Phi(x/sqrt(v)) transition) inside a wide smooth measure.
template <typename Scalar>
std::vector<Scalar> graded_cuts(Scalar lo, Scalar hi, Scalar coarse, Scalar fine_lo, Scalar fine_hi, Scalar fine) {
  std::vector<Scalar> cuts;
  auto uniform = [&cuts](Scalar a, Scalar b, Scalar h) {
    if (!(b > a)) return;
    const auto pieces = static_cast<long>(std::ceil((b - a) / h));
    for (long i = 0; i < pieces; ++i) cuts.push_back(a + (b - a) * Scalar(i) / Scalar(pieces));
  };
  fine_lo = std::clamp(fine_lo, lo, hi);
  fine_hi = std::clamp(fine_hi, lo, hi);
  fine = std::min(fine, coarse);
  uniform(lo, fine_lo, coarse);
  uniform(fine_lo, fine_hi, fine);
  uniform(fine_hi, hi, coarse);
  cuts.push_back(hi);
  return cuts;
}

}  // namespace wiretap

#endif  // WIRETAP_QUADRATURE_HPP
