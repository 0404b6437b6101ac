#pragma once

#include <Eigen/Core>

namespace qnacf {

/// Gauss-Hermite rule for the standard normal measure: sum_i w_i f(x_i) ~ E[f(Z)].
/// Weights sum to one.
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  template <typename F>
  double expect(F&& f) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < nodes.size(); ++i) s += weights(i) * f(nodes(i));
    return s;
  }
};

/// Golub-Welsch on the probabilists' Jacobi matrix, nodes polished by Newton on the
/// orthonormal recurrence and weights recomputed from the Christoffel function.
GaussHermiteRule gauss_hermite_rule(int nodes);

/// Column q holds He_q(x), the monic (probabilists') Hermite polynomial, q = 0..q_max.
Eigen::MatrixXd hermite_polynomials(const Eigen::VectorXd& x, int q_max);

/// He_q(x) for a single point.
double hermite(int q, double x);

}  // namespace qnacf
