#include "qnacf/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qnacf/errors.hpp"
#include "qnacf/normal.hpp"
#include "qnacf/quadrature.hpp"

namespace qnacf {

namespace {

constexpr double kRankTolerance = 1e-7;

const GaussHermiteRule& default_rule() {
  static const GaussHermiteRule rule = gauss_hermite_rule(128);
  return rule;
}

GaussHermiteRule rule_for(int nodes) {
  return nodes == 128 ? default_rule() : gauss_hermite_rule(nodes);
}

double if_denominator() {
  const double c = gaussian_consistency_constant();
  return std::exp(-1.0 / (4.0 * c * c)) / (2.0 * std::sqrt(std::numbers::pi));
}

void require_finite_variance_regime(const AcvFunction& acv, const char* who) {
  if (acv.regime == MemoryRegime::long_memory && !(acv.D > 0.5)) {
    throw RegimeError(std::string(who) +
                      ": long memory with D <= 1/2 has no sqrt(n) limit; use long_memory_limits");
  }
}

// Sum of term(k) for k = 1..k_last with an estimate of the omitted tail
// sum_{k > k_last} |term(k)|. Stops early once a geometric tail is negligible.
template <typename Term>
SeriesValue sum_series(Term&& term, std::size_t k_last, const AcvFunction& acv,
                       std::size_t min_terms) {
  double sum = 0.0;
  double comp = 0.0;  // Neumaier compensation
  double prev = 0.0;
  double last = 0.0;
  std::size_t k = 1;
  SeriesValue out;
  for (; k <= k_last; ++k) {
    const double t = term(static_cast<long>(k));
    const double y = sum + t;
    comp += std::abs(sum) >= std::abs(t) ? (sum - y) + t : (t - y) + sum;
    sum = y;
    prev = last;
    last = std::abs(t);
    if (acv.regime == MemoryRegime::short_memory && k >= min_terms && prev > 0.0 && last < prev) {
      const double r = last / prev;
      const double tail = last * r / (1.0 - r);
      if (tail <= 1e-17 * std::abs(sum + comp)) {
        out.value = sum + comp;
        out.tail_bound = tail;
        out.terms = k;
        return out;
      }
    }
  }
  out.value = sum + comp;
  out.terms = k - 1;
  if (last == 0.0 && prev == 0.0) {
    out.tail_bound = 0.0;
  } else if (acv.regime == MemoryRegime::long_memory) {
    const double K = static_cast<double>(out.terms);
    out.tail_bound = last * K / (2.0 * acv.D - 1.0);
  } else if (prev > 0.0 && last < prev) {
    const double r = last / prev;
    out.tail_bound = last * r / (1.0 - r);
  } else {
    out.tail_bound = std::numeric_limits<double>::infinity();
  }
  return out;
}

std::size_t usable_terms(const AcvFunction& acv, std::size_t k_max, std::size_t reach) {
  const std::size_t available = acv.max_lag() > reach ? acv.max_lag() - reach : 0;
  return std::min(k_max, available);
}

}  // namespace

double influence_q(double x) {
  const double c = gaussian_consistency_constant();
  const double r0 = 1.0 / c;
  return c * (0.25 - normal_cdf(x + r0) + normal_cdf(x - r0)) / if_denominator();
}

double influence_q_general(double x, double mu, double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("influence_q_general: sigma must be positive");
  return sigma * influence_q((x - mu) / sigma);
}

double HermiteExpansion::parseval_sum(int upto) const {
  const int last = upto < 0 ? q_max : std::min(upto, q_max);
  double s = 0.0;
  double factorial = 1.0;
  for (int q = 0; q <= last; ++q) {
    if (q > 0) factorial *= q;
    s += coefficients(q) * coefficients(q) / factorial;
  }
  return s;
}

HermiteExpansion hermite_coefficients(const std::function<double(double)>& f, int q_max, int nodes) {
  if (q_max < 2) throw ValidationError("hermite_coefficients: q_max must be at least 2");
  if (nodes < 64) throw ValidationError("hermite_coefficients: need at least 64 nodes");
  const GaussHermiteRule rule = rule_for(nodes);
  const Eigen::Index m = rule.nodes.size();

  Eigen::VectorXd fx(m);
  for (Eigen::Index i = 0; i < m; ++i) fx(i) = f(rule.nodes(i));
  if (!fx.allFinite()) throw NumericError("hermite_coefficients: f is not finite at a quadrature node");

  const Eigen::MatrixXd he = hermite_polynomials(rule.nodes, q_max);
  HermiteExpansion out;
  out.q_max = q_max;
  out.coefficients = he.transpose() * rule.weights.cwiseProduct(fx);
  out.mean_square = rule.weights.dot(fx.cwiseProduct(fx));

  // Divergence check: E[f^2] must agree with a rule of half the size.
  const GaussHermiteRule coarse = gauss_hermite_rule(nodes / 2);
  const double coarse_ms = coarse.expect([&](double z) { const double v = f(z); return v * v; });
  const double scale = std::max(1.0, std::abs(out.mean_square));
  if (!out.coefficients.allFinite() || !std::isfinite(out.mean_square) ||
      std::abs(coarse_ms - out.mean_square) > 1e-6 * scale) {
    throw NumericError("hermite_coefficients: quadrature does not converge (f not square integrable?)");
  }

  for (int q = 0; q <= q_max; ++q) {
    if (std::abs(out.coefficients(q)) > kRankTolerance) {
      out.hermite_rank = q;
      break;
    }
  }
  return out;
}

const HermiteExpansion& influence_expansion() {
  static const HermiteExpansion expansion = hermite_coefficients(influence_q, 30, 128);
  return expansion;
}

HermiteExpansion influence_expansion(int q_max) {
  return q_max == 30 ? influence_expansion() : hermite_coefficients(influence_q, q_max, 128);
}

double if_cross_expectation(double rho, const HermiteExpansion& expansion) {
  if (!(std::abs(rho) <= 1.0 + 1e-12)) {
    throw ValidationError("if_cross_expectation: correlation must lie in [-1, 1]");
  }
  rho = std::clamp(rho, -1.0, 1.0);
  double s = 0.0;
  double factorial = 1.0;
  double power = 1.0;
  for (int q = 1; q <= expansion.q_max; ++q) {
    factorial *= q;
    power *= rho;
    const double a = expansion.coefficients(q);
    s += a * a / factorial * power;
  }
  return s;
}

double AcvFunction::at(long k) const {
  const auto lag = static_cast<Eigen::Index>(k < 0 ? -k : k);
  return lag < gamma.size() ? gamma(lag) : 0.0;
}

void validate_acv(const AcvFunction& acv) {
  if (acv.gamma.size() == 0 || !(acv.gamma(0) > 0.0)) {
    throw ValidationError("autocovariance: gamma(0) must be positive");
  }
  if (!acv.gamma.allFinite()) throw ValidationError("autocovariance: non-finite values");
  if ((acv.gamma.array().abs() > acv.gamma(0) * (1.0 + 1e-12)).any()) {
    throw ValidationError("autocovariance: |gamma(k)| exceeds gamma(0)");
  }
  if (acv.regime == MemoryRegime::long_memory && !(acv.D > 0.0 && acv.D < 1.0)) {
    throw ValidationError("autocovariance: long-memory exponent D must lie in (0, 1)");
  }
}

SeriesValue asymp_var_qn(const AcvFunction& acv, const AsymptoticOptions& opt) {
  validate_acv(acv);
  require_finite_variance_regime(acv, "asymp_var_qn");
  const HermiteExpansion ex = influence_expansion(opt.q_max);
  const double g0 = acv.at(0);
  const SeriesValue tail = sum_series(
      [&](long k) { return if_cross_expectation(acv.at(k) / g0, ex); },
      usable_terms(acv, opt.k_max, 0), acv, 2);
  SeriesValue out;
  out.value = g0 * (if_cross_expectation(1.0, ex) + 2.0 * tail.value);
  out.tail_bound = 2.0 * g0 * tail.tail_bound;
  out.terms = tail.terms;
  return out;
}

SeriesValue asymp_var_classical_scale(const AcvFunction& acv, const AsymptoticOptions& opt) {
  validate_acv(acv);
  require_finite_variance_regime(acv, "asymp_var_classical_scale");
  const double g0 = acv.at(0);
  const SeriesValue tail = sum_series(
      [&](long k) { const double g = acv.at(k); return g * g; },
      usable_terms(acv, opt.k_max, 0), acv, 2);
  SeriesValue out;
  out.value = (g0 * g0 + 2.0 * tail.value) / (2.0 * g0);
  out.tail_bound = tail.tail_bound / g0;
  out.terms = tail.terms;
  return out;
}

double are_scale(const AcvFunction& acv, const AsymptoticOptions& opt) {
  return asymp_var_classical_scale(acv, opt).value / asymp_var_qn(acv, opt).value;
}

double psi_value(double x, double y, double gamma0, double gammah) {
  if (!(gamma0 > std::abs(gammah))) {
    throw ValidationError("psi_value: requires gamma(0) > |gamma(h)|");
  }
  const double a = gamma0 + gammah;
  const double b = gamma0 - gammah;
  return a * influence_q((x + y) / std::sqrt(2.0 * a)) - b * influence_q((x - y) / std::sqrt(2.0 * b));
}

SumDiffCorrelations sum_diff_correlations(const AcvFunction& acv, std::size_t h, long k) {
  const auto lag = static_cast<long>(h);
  const double a = acv.at(0) + acv.at(lag);
  const double b = acv.at(0) - acv.at(lag);
  const double gk = acv.at(k);
  const double gp = acv.at(k + lag);
  const double gm = acv.at(k - lag);
  SumDiffCorrelations out;
  out.uu = (2.0 * gk + gp + gm) / (2.0 * a);
  out.vv = b > 0.0 ? (2.0 * gk - gp - gm) / (2.0 * b) : 0.0;
  out.uv = b > 0.0 ? (gm - gp) / (2.0 * std::sqrt(a * b)) : 0.0;
  return out;
}

SeriesValue asymp_var_robust_autocov(const AcvFunction& acv, std::size_t h,
                                     const AsymptoticOptions& opt) {
  validate_acv(acv);
  require_finite_variance_regime(acv, "asymp_var_robust_autocov");
  const double g0 = acv.at(0);
  const double gh = acv.at(static_cast<long>(h));
  if (h > 0 && !(g0 > std::abs(gh))) {
    throw ValidationError("asymp_var_robust_autocov: requires gamma(0) > |gamma(h)|");
  }
  const HermiteExpansion ex = influence_expansion(opt.q_max);
  const double a = g0 + gh;
  const double b = h == 0 ? 0.0 : g0 - gh;  // h = 0: psi reduces to 2 g0 IF(X / sigma)
  const auto cov = [&](long k) {
    const SumDiffCorrelations c = sum_diff_correlations(acv, h, k);
    double v = a * a * if_cross_expectation(c.uu, ex);
    if (b > 0.0) {
      v += b * b * if_cross_expectation(c.vv, ex) -
           a * b * (if_cross_expectation(c.uv, ex) + if_cross_expectation(-c.uv, ex));
    }
    return v;
  };
  const SeriesValue tail = sum_series(cov, usable_terms(acv, opt.k_max, h), acv, 2 * h + 2);
  SeriesValue out;
  out.value = cov(0) + 2.0 * tail.value;
  out.tail_bound = 2.0 * tail.tail_bound;
  out.terms = tail.terms;
  return out;
}

SeriesValue asymp_var_classical_autocov(const AcvFunction& acv, std::size_t h,
                                        const AsymptoticOptions& opt) {
  validate_acv(acv);
  require_finite_variance_regime(acv, "asymp_var_classical_autocov");
  const auto lag = static_cast<long>(h);
  const double g0 = acv.at(0);
  const double gh = acv.at(lag);
  const SeriesValue tail = sum_series(
      [&](long k) {
        const double g = acv.at(k);
        return g * g + acv.at(k + lag) * acv.at(k - lag);
      },
      usable_terms(acv, opt.k_max, h), acv, 2 * h + 2);
  SeriesValue out;
  out.value = g0 * g0 + gh * gh + 2.0 * tail.value;
  out.tail_bound = 2.0 * tail.tail_bound;
  out.terms = tail.terms;
  return out;
}

double are_autocov(const AcvFunction& acv, std::size_t h, const AsymptoticOptions& opt) {
  return asymp_var_classical_autocov(acv, h, opt).value / asymp_var_robust_autocov(acv, h, opt).value;
}

double beta_d(double D) {
  if (!(D > 0.0 && D < 1.0)) throw ValidationError("beta_d: D must lie in (0, 1)");
  return std::tgamma(0.5 * (1.0 - D)) * std::tgamma(D) / std::tgamma(0.5 * (1.0 + D));
}

RateClass classify_rate(double D) {
  if (!(D > 0.0 && D < 1.0)) throw ValidationError("classify_rate: D must lie in (0, 1)");
  if (D == 0.5) throw RegimeError("classify_rate: D = 1/2 is the boundary case, not covered");
  return D > 0.5 ? RateClass::sqrt_n : RateClass::nD_over_L;
}

double rosenblatt_fbm_mean(double D) {
  return -2.0 * beta_d(D) / ((1.0 - D) * (2.0 - D));
}

LongMemoryLimit long_memory_limits(double sigma, double gamma_h, double D, std::size_t h) {
  if (!(sigma > 0.0)) throw ValidationError("long_memory_limits: sigma must be positive");
  if (!(D > 0.0 && D < 1.0)) throw ValidationError("long_memory_limits: D must lie in (0, 1)");
  if (classify_rate(D) != RateClass::nD_over_L) {
    throw RegimeError("long_memory_limits: D > 1/2 gives a sqrt(n) Gaussian limit; use asymp_var_qn");
  }
  const double gamma0 = sigma * sigma;
  if (std::abs(gamma_h) > gamma0) throw ValidationError("long_memory_limits: |gamma(h)| > sigma^2");
  LongMemoryLimit out;
  out.D = D;
  out.beta_D = beta_d(D);
  out.rate = RateClass::nD_over_L;
  const double denom = (1.0 - D) * (2.0 - D);
  out.limit_mean_scale = 0.5 * sigma * rosenblatt_fbm_mean(D);
  out.mean_scale_unnormalized = -sigma / denom;
  out.limit_mean_autocov = 0.5 * (gamma0 + gamma_h) * rosenblatt_fbm_mean(D);
  out.mean_autocov_unnormalized = -(gamma0 + gamma_h) / denom;
  out.l_tilde_description = "L~(n) = 2L(n) + L(n+" + std::to_string(h) + ")(1+" + std::to_string(h) +
                            "/n)^{-D} + L(n-" + std::to_string(h) + ")(1-" + std::to_string(h) +
                            "/n)^{-D}";
  return out;
}

double l_tilde(double n, std::size_t h, double D, const std::function<double(double)>& L) {
  const double hh = static_cast<double>(h);
  if (!(n > hh)) throw ValidationError("l_tilde: need n > h");
  return 2.0 * L(n) + L(n + hh) * std::pow(1.0 + hh / n, -D) + L(n - hh) * std::pow(1.0 - hh / n, -D);
}

double bivariate_hermite_alpha(int p, int q, double r, int nodes) {
  if (p < 0 || q < 0) throw ValidationError("bivariate_hermite_alpha: degrees must be nonnegative");
  if (!(r >= 0.0)) throw ValidationError("bivariate_hermite_alpha: r must be nonnegative");
  const GaussHermiteRule rule = rule_for(nodes);
  // Inner integral int_{x-r}^{x+r} He_q(y) phi(y) dy, using He_q phi = -(He_{q-1} phi)'.
  const auto inner = [&](double x) {
    if (q == 0) return normal_cdf(x + r) - normal_cdf(x - r);
    return hermite(q - 1, x - r) * normal_pdf(x - r) - hermite(q - 1, x + r) * normal_pdf(x + r);
  };
  return rule.expect([&](double x) { return hermite(p, x) * inner(x); });
}

}  // namespace qnacf
