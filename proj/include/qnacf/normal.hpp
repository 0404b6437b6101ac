#pragma once

namespace qnacf {

double normal_pdf(double x);
double normal_cdf(double x);

/// Standard-normal quantile. Rational approximation refined by one Halley step;
/// absolute error below 1e-13 on (1e-300, 1 - 1e-16). Throws ValidationError outside (0, 1).
double normal_quantile(double p);

/// c(Phi) = 1 / (sqrt(2) * Phi^{-1}(5/8)) = 2.21914..., making Qn consistent for sigma
/// under normality.
double gaussian_consistency_constant();

}  // namespace qnacf
