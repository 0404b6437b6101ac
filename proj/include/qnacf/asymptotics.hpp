#pragma once

// Influence function of Q at the Gaussian, its Hermite expansion, and the
// asymptotic variances / efficiencies / long-memory limit constants of Qn,
// gamma_Q and their classical counterparts.

#include <cstddef>
#include <functional>
#include <string>

#include <Eigen/Core>

namespace qnacf {

/// IF(x, Q, Phi) = c (1/4 - Phi(x + 1/c) + Phi(x - 1/c)) / beta, with
/// beta = int phi(y) phi(y + 1/c) dy = exp(-1/(4c^2)) / (2 sqrt(pi)).
double influence_q(double x);

/// sigma * IF((x - mu) / sigma, Q, Phi). Throws ValidationError unless sigma > 0.
double influence_q_general(double x, double mu, double sigma);

/// Coefficients alpha_q = E[f(Z) He_q(Z)], so that f = sum_q alpha_q / q! He_q.
struct HermiteExpansion {
  Eigen::VectorXd coefficients;  // alpha_0..alpha_{q_max}
  int q_max = 0;
  int hermite_rank = -1;     // first q with |alpha_q| > 1e-7; -1 if none
  double mean_square = 0.0;  // E[f(Z)^2] by the same quadrature

  /// sum_{q <= upto} alpha_q^2 / q!  (upto < 0 means q_max).
  double parseval_sum(int upto = -1) const;
};

HermiteExpansion hermite_coefficients(const std::function<double(double)>& f, int q_max = 30,
                                      int nodes = 128);

/// Expansion of IF(., Q, Phi); the default (q_max = 30) is computed once and cached.
const HermiteExpansion& influence_expansion();
HermiteExpansion influence_expansion(int q_max);

/// sum_{q >= 1} alpha_q^2 / q! rho^q = Cov(f(X), f(Y)) for standard normals with
/// correlation rho. Equals E[f(X) f(Y)] for centred f (such as IF).
double if_cross_expectation(double rho, const HermiteExpansion& expansion);

enum class MemoryRegime { short_memory, long_memory };

/// Autocovariance gamma(0..max_lag) of a stationary process with its regime tag.
/// Lags beyond max_lag read as 0; negative lags read as gamma(|k|).
struct AcvFunction {
  Eigen::VectorXd gamma;
  MemoryRegime regime = MemoryRegime::short_memory;
  double D = 0.0;  // long-memory exponent, gamma(k) ~ k^{-D} L(k)
  std::string l_description;

  double at(long k) const;
  std::size_t max_lag() const { return static_cast<std::size_t>(gamma.size()) - 1; }
};

/// Throws ValidationError unless gamma(0) > 0 and |gamma(k)| <= gamma(0).
void validate_acv(const AcvFunction& acv);

struct AsymptoticOptions {
  int q_max = 30;
  std::size_t k_max = 10000;
};

/// Truncated series value with an estimate of the omitted tail.
struct SeriesValue {
  double value = 0.0;
  double tail_bound = 0.0;
  std::size_t terms = 0;
};

/// sigma~^2 = gamma(0) [g(1) + 2 sum_{k>=1} g(rho_k)], g = if_cross_expectation.
SeriesValue asymp_var_qn(const AcvFunction& acv, const AsymptoticOptions& opt = {});

/// (2 gamma(0))^{-1} (gamma(0)^2 + 2 sum_{k>=1} gamma(k)^2).
SeriesValue asymp_var_classical_scale(const AcvFunction& acv, const AsymptoticOptions& opt = {});

/// asymp_var_classical_scale / asymp_var_qn.
double are_scale(const AcvFunction& acv, const AsymptoticOptions& opt = {});

/// psi(x, y) = (g0 + gh) IF((x+y)/sqrt(2(g0+gh))) - (g0 - gh) IF((x-y)/sqrt(2(g0-gh))).
double psi_value(double x, double y, double gamma0, double gammah);

/// Correlations of U_i = (X_i + X_{i+h})/s+ and V_i = (X_i - X_{i+h})/s- at index
/// offset k, as used by asymp_var_robust_autocov.
struct SumDiffCorrelations {
  double uu = 0.0;
  double vv = 0.0;
  double uv = 0.0;  // corr(U_1, V_{1+k}); corr(V_1, U_{1+k}) = -uv
};

SumDiffCorrelations sum_diff_correlations(const AcvFunction& acv, std::size_t h, long k);

/// sigma-check^2(h) = sum_{k in Z} Cov(psi(X_1, X_{1+h}), psi(X_{1+k}, X_{1+k+h})).
SeriesValue asymp_var_robust_autocov(const AcvFunction& acv, std::size_t h,
                                     const AsymptoticOptions& opt = {});

/// g0^2 + g(h)^2 + 2 sum_{k>=1} g(k)^2 + 2 sum_{k>=1} g(k+h) g(k-h).
SeriesValue asymp_var_classical_autocov(const AcvFunction& acv, std::size_t h,
                                        const AsymptoticOptions& opt = {});

/// ARE(h) = classical / robust asymptotic variance of the lag-h autocovariance.
double are_autocov(const AcvFunction& acv, std::size_t h, const AsymptoticOptions& opt = {});

/// beta(D) = B((1 - D)/2, D) for 0 < D < 1.
double beta_d(double D);

enum class RateClass { sqrt_n, nD_over_L };

/// sqrt_n for D > 1/2, nD_over_L for D < 1/2; D = 1/2 and D outside (0,1) are rejected.
RateClass classify_rate(double D);

struct LongMemoryLimit {
  double D = 0.0;
  double beta_D = 0.0;
  RateClass rate = RateClass::nD_over_L;
  /// Mean of the limit of beta(D) n^D / L(n) (Qn - sigma): (sigma/2) E[Z2 - Z1^2].
  double limit_mean_scale = 0.0;
  /// Mean of the limit of n^D / L(n) (Qn - sigma) = -sigma / ((1-D)(2-D)).
  double mean_scale_unnormalized = 0.0;
  /// Mean of the limit of beta(D) n^D / L~(n) (gamma_Q(h) - gamma(h)).
  double limit_mean_autocov = 0.0;
  /// Mean of the limit of n^D / L~(n) (gamma_Q(h) - gamma(h)).
  double mean_autocov_unnormalized = 0.0;
  std::string l_tilde_description;
};

/// E[Z_{2,D}(1) - Z_{1,D}(1)^2] = -2 beta(D) / ((1-D)(2-D)).
double rosenblatt_fbm_mean(double D);

/// Limit constants for 0 < D < 1/2 (RegimeError otherwise). gamma(0) = sigma^2.
LongMemoryLimit long_memory_limits(double sigma, double gamma_h, double D, std::size_t h);

/// L~(n) = 2 L(n) + L(n+h)(1+h/n)^{-D} + L(n-h)(1-h/n)^{-D}.
double l_tilde(double n, std::size_t h, double D, const std::function<double(double)>& L);

/// alpha_{p,q}(r) = E[1{|X - Y| <= r} He_p(X) He_q(Y)] for independent standard normals.
/// The inner integral over Y is taken in closed form.
double bivariate_hermite_alpha(int p, int q, double r, int nodes = 128);

}  // namespace qnacf
