#include "qnacf/quadrature.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "qnacf/errors.hpp"

namespace qnacf {

namespace {

// Orthonormal Hermite values p_0..p_{n} at x under the N(0,1) measure;
// returns p_n, p_{n-1} and accumulates sum_{k<n} p_k^2.
struct OrthonormalEval {
  double pn;
  double pn1;
  double christoffel;
};

OrthonormalEval orthonormal_eval(int n, double x) {
  double prev = 0.0;
  double cur = 1.0;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    sum += cur * cur;
    const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(k + 1.0);
    prev = cur;
    cur = next;
  }
  return {cur, prev, sum};
}

}  // namespace

GaussHermiteRule gauss_hermite_rule(int nodes) {
  if (nodes < 1) throw ValidationError("gauss_hermite_rule: need at least one node");
  const Eigen::Index n = nodes;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n > 1 ? n - 1 : 0);
  for (Eigen::Index k = 0; k + 1 < n; ++k) sub(k) = std::sqrt(static_cast<double>(k + 1));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("gauss_hermite_rule: eigen solver failed");

  GaussHermiteRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double x = rule.nodes(i);
    for (int it = 0; it < 3; ++it) {
      const OrthonormalEval e = orthonormal_eval(nodes, x);
      // p_n' = sqrt(n) p_{n-1}
      x -= e.pn / (std::sqrt(static_cast<double>(nodes)) * e.pn1);
    }
    rule.nodes(i) = x;
    rule.weights(i) = 1.0 / orthonormal_eval(nodes, x).christoffel;
  }
  // Symmetrise: the rule is exact for odd functions only if x_i = -x_{n-1-i}.
  for (Eigen::Index i = 0; i < n / 2; ++i) {
    const Eigen::Index j = n - 1 - i;
    const double x = 0.5 * (rule.nodes(j) - rule.nodes(i));
    const double w = 0.5 * (rule.weights(i) + rule.weights(j));
    rule.nodes(i) = -x;
    rule.nodes(j) = x;
    rule.weights(i) = rule.weights(j) = w;
  }
  if (n % 2 == 1) rule.nodes(n / 2) = 0.0;
  rule.weights /= rule.weights.sum();
  return rule;
}

Eigen::MatrixXd hermite_polynomials(const Eigen::VectorXd& x, int q_max) {
  if (q_max < 0) throw ValidationError("hermite_polynomials: q_max must be nonnegative");
  Eigen::MatrixXd he(x.size(), q_max + 1);
  he.col(0).setOnes();
  if (q_max >= 1) he.col(1) = x;
  for (int q = 1; q < q_max; ++q) {
    he.col(q + 1) = x.cwiseProduct(he.col(q)) - static_cast<double>(q) * he.col(q - 1);
  }
  return he;
}

double hermite(int q, double x) {
  if (q < 0) throw ValidationError("hermite: degree must be nonnegative");
  if (q == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < q; ++k) {
    const double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace qnacf
