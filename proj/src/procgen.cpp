#include "qnacf/procgen.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "qnacf/errors.hpp"
#include "qnacf/rng.hpp"

namespace qnacf {

namespace {

constexpr std::size_t kMaxTruncation = std::size_t{1} << 22;
constexpr std::size_t kDirectConvolutionWork = 20'000'000;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t next_pow2(std::size_t v) {
  std::size_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

void check_n(std::size_t n) {
  if (n < 1) throw ValidationError("series length must be at least 1");
}

void check_d(double d) {
  if (!(d > -0.5 && d < 0.5)) throw ValidationError("ARFIMA d must lie in (-1/2, 1/2)");
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

Eigen::VectorXd normals(Engine& eng, std::size_t count, double sd = 1.0) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd z(static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = sd * dist(eng);
  return z;
}

// y_t = sum_{j=0}^{M} psi_j z_{t+M-j}, t = 0..n-1, for z of length n + M.
Eigen::VectorXd ma_filter(const Eigen::VectorXd& psi, const Eigen::VectorXd& z, std::size_t n) {
  const auto M = static_cast<Eigen::Index>(psi.size()) - 1;
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::VectorXd y(nn);
  if (static_cast<double>(n) * static_cast<double>(M + 1) <= static_cast<double>(kDirectConvolutionWork)) {
    for (Eigen::Index t = 0; t < nn; ++t) {
      // psi reversed against the window z[t .. t+M]
      y(t) = psi.reverse().dot(z.segment(t, M + 1));
    }
    return y;
  }
  const std::size_t L = next_pow2(static_cast<std::size_t>(z.size()));
  std::vector<double> a(L, 0.0);
  std::vector<double> b(L, 0.0);
  std::copy(psi.data(), psi.data() + psi.size(), a.begin());
  std::copy(z.data(), z.data() + z.size(), b.begin());
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> fa;
  std::vector<std::complex<double>> fb;
  fft.fwd(fa, a);
  fft.fwd(fb, b);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  std::vector<double> c;
  fft.inv(c, fa);
  for (Eigen::Index t = 0; t < nn; ++t) y(t) = c[static_cast<std::size_t>(t + M)];
  return y;
}

}  // namespace

void ProcessSpec::validate() const {
  if (!(innovation_sd > 0.0)) throw ValidationError("process: innovation_sd must be positive");
  std::visit(Overloaded{
                 [](const WhiteNoise&) {},
                 [](const Ar1& p) {
                   if (!(std::abs(p.phi) < 1.0)) throw ValidationError("process: AR(1) needs |phi| < 1");
                 },
                 [](const Arfima& p) { check_d(p.d); },
                 [](const SkewedAr1& p) {
                   if (!(std::abs(p.phi) < 1.0)) throw ValidationError("process: AR(1) needs |phi| < 1");
                   if (!std::isfinite(p.epsilon)) throw ValidationError("process: epsilon must be finite");
                 },
             },
             kind);
}

std::string ProcessSpec::describe() const {
  return std::visit(Overloaded{
                        [](const WhiteNoise&) { return std::string("white_noise"); },
                        [](const Ar1& p) { return "ar1(phi=" + format_double(p.phi) + ")"; },
                        [](const Arfima& p) { return "arfima(d=" + format_double(p.d) + ")"; },
                        [](const SkewedAr1& p) {
                          return "ar1_skewed(phi=" + format_double(p.phi) +
                                 ", epsilon=" + format_double(p.epsilon) + ")";
                        },
                    },
                    kind);
}

void OutlierSpec::validate() const {
  if (!(probability >= 0.0 && probability <= 1.0)) {
    throw ValidationError("outliers: probability must lie in [0, 1]");
  }
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
    throw ValidationError("outliers: magnitude must be finite and nonnegative");
  }
}

TimeSeries gen_white_noise(std::size_t n, std::uint64_t seed, double sd) {
  check_n(n);
  Engine eng = make_engine(seed);
  return TimeSeries(normals(eng, n, sd), {{"process", "white_noise"}, {"seed", std::to_string(seed)}});
}

TimeSeries gen_ar1(std::size_t n, double phi, std::uint64_t seed, double innovation_sd) {
  check_n(n);
  if (!(std::abs(phi) < 1.0)) throw ValidationError("gen_ar1: |phi| must be < 1");
  Engine eng = make_engine(seed);
  Eigen::VectorXd y = normals(eng, n, innovation_sd);
  y(0) /= std::sqrt(1.0 - phi * phi);
  for (Eigen::Index t = 1; t < y.size(); ++t) y(t) += phi * y(t - 1);
  return TimeSeries(std::move(y), {{"process", "ar1(phi=" + format_double(phi) + ")"},
                                   {"seed", std::to_string(seed)}});
}

TimeSeries gen_skewed_ar1(std::size_t n, double phi, double epsilon, std::uint64_t seed) {
  check_n(n);
  if (!(std::abs(phi) < 1.0)) throw ValidationError("gen_skewed_ar1: |phi| must be < 1");
  Engine eng = make_engine(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  const auto innovation = [&] {
    const double w = dist(eng);
    const double y = dist(eng);
    return w + epsilon * y * y;
  };
  // Start at the stationary mean and burn in until phi^burn is negligible.
  double x = epsilon / (1.0 - phi);
  const auto burn = static_cast<std::size_t>(std::ceil(std::log(1e-17) / std::log(std::max(std::abs(phi), 1e-3))));
  for (std::size_t t = 0; t < burn; ++t) x = phi * x + innovation();
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  for (Eigen::Index t = 0; t < out.size(); ++t) {
    x = phi * x + innovation();
    out(t) = x;
  }
  return TimeSeries(std::move(out), {{"process", "ar1_skewed(phi=" + format_double(phi) + ", epsilon=" +
                                                     format_double(epsilon) + ")"},
                                     {"seed", std::to_string(seed)}});
}

Eigen::VectorXd arfima_ma_coefficients(double d, std::size_t M) {
  check_d(d);
  if (d == 0.0) throw ValidationError("arfima_ma_coefficients: d must be nonzero");
  if (M < 1) throw ValidationError("arfima_ma_coefficients: M must be at least 1");
  Eigen::VectorXd psi(static_cast<Eigen::Index>(M + 1));
  psi(0) = 1.0;
  for (Eigen::Index j = 1; j < psi.size(); ++j) {
    psi(j) = psi(j - 1) * (static_cast<double>(j) - 1.0 + d) / static_cast<double>(j);
  }
  return psi;
}

double arfima_variance(double d) {
  check_d(d);
  const double g = std::tgamma(1.0 - d);
  return std::tgamma(1.0 - 2.0 * d) / (g * g);
}

double arfima_tail_variance_bound(double d, std::size_t M) {
  check_d(d);
  if (d == 0.0) return 0.0;
  // |psi_j| <= |psi_M| (M/j)^{1-d} for j > M, so the tail is at most psi_M^2 M / (1 - 2d).
  const double log_psi = std::lgamma(static_cast<double>(M) + d) - std::lgamma(static_cast<double>(M) + 1.0) -
                         std::lgamma(std::abs(d));
  const double psi_m = std::exp(log_psi);
  return psi_m * psi_m * static_cast<double>(M) / (1.0 - 2.0 * d);
}

std::size_t arfima_default_truncation(double d, std::size_t n, double rel_tol) {
  check_d(d);
  const double target = rel_tol * arfima_variance(d);
  std::size_t M = std::max<std::size_t>(10000, n);
  while (M < kMaxTruncation && arfima_tail_variance_bound(d, M) >= target) M *= 2;
  return std::min(M, kMaxTruncation);
}

TimeSeries gen_gaussian_durbin_levinson(const AcvFunction& acv, std::size_t n, std::uint64_t seed) {
  check_n(n);
  if (acv.max_lag() + 1 < n) throw ValidationError("durbin-levinson: autocovariance shorter than n");
  Engine eng = make_engine(seed);
  const Eigen::VectorXd z = normals(eng, n);
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::VectorXd x(nn);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(nn);
  Eigen::VectorXd next(nn);
  double v = acv.gamma(0);
  x(0) = std::sqrt(v) * z(0);
  for (Eigen::Index t = 1; t < nn; ++t) {
    double acc = acv.gamma(t);
    for (Eigen::Index j = 1; j < t; ++j) acc -= phi(j - 1) * acv.gamma(t - j);
    const double kappa = acc / v;
    for (Eigen::Index j = 1; j < t; ++j) next(j - 1) = phi(j - 1) - kappa * phi(t - j - 1);
    next(t - 1) = kappa;
    phi.head(t) = next.head(t);
    v *= (1.0 - kappa * kappa);
    if (!(v > 0.0)) throw NumericError("durbin-levinson: autocovariance is not positive definite");
    double mean = 0.0;
    for (Eigen::Index j = 1; j <= t; ++j) mean += phi(j - 1) * x(t - j);
    x(t) = mean + std::sqrt(v) * z(t);
  }
  return TimeSeries(std::move(x), {{"method", "durbin_levinson"}, {"seed", std::to_string(seed)}});
}

TimeSeries gen_gaussian_circulant(const AcvFunction& acv, std::size_t n, std::uint64_t seed) {
  check_n(n);
  const std::size_t m = next_pow2(std::max<std::size_t>(2, 2 * (n - 1)));
  const std::size_t half = m / 2;
  if (acv.max_lag() < half) throw ValidationError("circulant embedding: autocovariance too short");
  std::vector<std::complex<double>> row(m);
  for (std::size_t j = 0; j < m; ++j) {
    row[j] = acv.gamma(static_cast<Eigen::Index>(j <= half ? j : m - j));
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> eig;
  fft.fwd(eig, row);
  double max_eig = 0.0;
  double min_eig = 0.0;
  for (const auto& e : eig) {
    max_eig = std::max(max_eig, e.real());
    min_eig = std::min(min_eig, e.real());
  }
  if (min_eig < -1e-10 * max_eig) {
    throw NumericError("circulant embedding is not nonnegative definite");
  }
  Engine eng = make_engine(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<std::complex<double>> w(m);
  const double md = static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double re = dist(eng);
    const double im = dist(eng);
    w[k] = std::sqrt(std::max(eig[k].real(), 0.0) / md) * std::complex<double>(re, im);
  }
  std::vector<std::complex<double>> out;
  fft.fwd(out, w);
  Eigen::VectorXd x(static_cast<Eigen::Index>(n));
  for (Eigen::Index t = 0; t < x.size(); ++t) x(t) = out[static_cast<std::size_t>(t)].real();
  return TimeSeries(std::move(x), {{"method", "circulant_embedding"}, {"seed", std::to_string(seed)}});
}

TimeSeries gen_arfima(std::size_t n, double d, std::uint64_t seed, const ArfimaOptions& opt) {
  check_n(n);
  check_d(d);
  if (!(opt.innovation_sd > 0.0)) throw ValidationError("gen_arfima: innovation_sd must be positive");
  const std::string tag = "arfima(d=" + format_double(d) + ")";

  if (opt.method != ArfimaMethod::truncated_ma) {
    ProcessSpec spec;
    spec.kind = Arfima{d};
    spec.innovation_sd = opt.innovation_sd;
    const std::size_t lags = next_pow2(std::max<std::size_t>(2, 2 * (n - 1))) / 2;
    const AcvFunction acv = theoretical_acv(spec, std::max(lags, n));
    TimeSeries out = [&] {
      if (opt.method == ArfimaMethod::circulant_embedding) {
        try {
          return gen_gaussian_circulant(acv, n, seed);
        } catch (const NumericError&) {
          TimeSeries fallback = gen_gaussian_durbin_levinson(acv, n, seed);
          fallback.set_metadata("warning", "circulant embedding indefinite; used durbin_levinson");
          return fallback;
        }
      }
      return gen_gaussian_durbin_levinson(acv, n, seed);
    }();
    out.set_metadata("process", tag);
    return out;
  }

  const std::size_t M = opt.truncation > 0 ? opt.truncation : arfima_default_truncation(d, n);
  const double tail = arfima_tail_variance_bound(d, M);
  Engine eng = make_engine(seed);
  const Eigen::VectorXd z = normals(eng, n + M, opt.innovation_sd);
  Eigen::VectorXd y = d == 0.0 ? Eigen::VectorXd(z.tail(static_cast<Eigen::Index>(n)))
                               : ma_filter(arfima_ma_coefficients(d, M), z, n);
  TimeSeries out(std::move(y), {{"process", tag},
                                {"seed", std::to_string(seed)},
                                {"method", "truncated_ma"},
                                {"truncation", std::to_string(M)},
                                {"tail_variance_bound", format_double(tail)}});
  if (d != 0.0 && tail >= 1e-4 * arfima_variance(d)) {
    out.set_metadata("warning", "omitted MA tail variance " + format_double(tail) +
                                    " exceeds 1e-4 of the process variance");
  }
  return out;
}

TimeSeries generate(const ProcessSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  return std::visit(Overloaded{
                        [&](const WhiteNoise&) { return gen_white_noise(n, seed, spec.innovation_sd); },
                        [&](const Ar1& p) { return gen_ar1(n, p.phi, seed, spec.innovation_sd); },
                        [&](const Arfima& p) {
                          return gen_arfima(n, p.d, seed,
                                            {spec.arfima_method, spec.truncation, spec.innovation_sd});
                        },
                        [&](const SkewedAr1& p) { return gen_skewed_ar1(n, p.phi, p.epsilon, seed); },
                    },
                    spec.kind);
}

AcvFunction theoretical_acv(const ProcessSpec& spec, std::size_t max_lag) {
  spec.validate();
  const double s2 = spec.innovation_sd * spec.innovation_sd;
  AcvFunction acv;
  acv.gamma = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(max_lag + 1));
  const auto geometric = [&](double phi, double var0) {
    double g = var0;
    for (Eigen::Index k = 0; k < acv.gamma.size(); ++k) {
      acv.gamma(k) = g;
      g *= phi;
    }
  };
  std::visit(Overloaded{
                 [&](const WhiteNoise&) { acv.gamma(0) = s2; },
                 [&](const Ar1& p) { geometric(p.phi, s2 / (1.0 - p.phi * p.phi)); },
                 [&](const Arfima& p) {
                   const double d = p.d;
                   double rho = 1.0;
                   const double g0 = s2 * arfima_variance(d);
                   for (Eigen::Index k = 0; k < acv.gamma.size(); ++k) {
                     if (k > 0) rho *= (static_cast<double>(k) - 1.0 + d) / (static_cast<double>(k) - d);
                     acv.gamma(k) = g0 * rho;
                   }
                   if (d > 0.0) {
                     acv.regime = MemoryRegime::long_memory;
                     acv.D = 1.0 - 2.0 * d;
                     acv.l_description = "L(k) -> gamma(0) Gamma(1-d)/Gamma(d) = " +
                                         format_double(g0 * std::tgamma(1.0 - d) / std::tgamma(d)) +
                                         " (constant)";
                   }
                 },
                 [&](const SkewedAr1& p) {
                   geometric(p.phi, (1.0 + 2.0 * p.epsilon * p.epsilon) / (1.0 - p.phi * p.phi));
                 },
             },
             spec.kind);
  return acv;
}

ContaminatedSeries contaminate(const TimeSeries& y, const OutlierSpec& spec, std::uint64_t seed) {
  spec.validate();
  Engine eng = make_engine(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd x = y.values();
  std::vector<OutlierEvent> events;
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    const double u = unif(eng);
    const int sign = unif(eng) < 0.5 ? -1 : 1;
    if (u < spec.probability && spec.magnitude != 0.0) {
      OutlierEvent ev;
      ev.index = static_cast<std::size_t>(t);
      ev.sign = sign;
      ev.original = x(t);
      x(t) += spec.magnitude * sign;
      ev.contaminated = x(t);
      events.push_back(ev);
    }
  }
  auto meta = y.metadata();
  meta["outliers"] = "p=" + format_double(spec.probability) + ", omega=" + format_double(spec.magnitude) +
                     ", count=" + std::to_string(events.size());
  return {TimeSeries(std::move(x), std::move(meta)), std::move(events)};
}

}  // namespace qnacf
