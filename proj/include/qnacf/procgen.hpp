#pragma once

// Seeded Gaussian AR(1) / ARFIMA(0,d,0) / white-noise paths, their exact
// autocovariances, and additive-outlier contamination.

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "qnacf/asymptotics.hpp"
#include "qnacf/time_series.hpp"

namespace qnacf {

struct WhiteNoise {};

struct Ar1 {
  double phi = 0.0;
};

struct Arfima {
  double d = 0.0;
};

/// AR(1) driven by skewed innovations Z_t = W_t + epsilon Y_t^2 (W, Y iid N(0,1)).
/// Kept as a harness preset; the innovations are not centred.
struct SkewedAr1 {
  double phi = 0.9;
  double epsilon = 0.4;
};

using ProcessKind = std::variant<WhiteNoise, Ar1, Arfima, SkewedAr1>;

enum class ArfimaMethod {
  truncated_ma,         // MA(M) convolution with the fractional weights
  circulant_embedding,  // exact (Davies-Harte), Durbin-Levinson fallback
  durbin_levinson,      // exact, O(n^2)
};

struct ProcessSpec {
  ProcessKind kind = WhiteNoise{};
  double innovation_sd = 1.0;
  ArfimaMethod arfima_method = ArfimaMethod::truncated_ma;
  std::size_t truncation = 0;  // ARFIMA MA truncation M; 0 picks the default

  void validate() const;
  std::string describe() const;
};

struct OutlierSpec {
  double probability = 0.0;  // p
  double magnitude = 0.0;    // omega

  void validate() const;
  bool active() const { return probability > 0.0 && magnitude != 0.0; }
};

TimeSeries gen_white_noise(std::size_t n, std::uint64_t seed, double sd = 1.0);

/// Stationary start Y_1 ~ N(0, 1/(1-phi^2)), then Y_t = phi Y_{t-1} + e_t.
TimeSeries gen_ar1(std::size_t n, double phi, std::uint64_t seed, double innovation_sd = 1.0);

TimeSeries gen_skewed_ar1(std::size_t n, double phi, double epsilon, std::uint64_t seed);

/// psi_0..psi_M with psi_j = Gamma(j+d) / (Gamma(j+1) Gamma(d)).
Eigen::VectorXd arfima_ma_coefficients(double d, std::size_t M);

/// Upper bound psi_M^2 M / (1 - 2d) on sum_{j > M} psi_j^2.
double arfima_tail_variance_bound(double d, std::size_t M);

/// Gamma(1 - 2d) / Gamma(1 - d)^2, the unit-innovation ARFIMA(0,d,0) variance.
double arfima_variance(double d);

/// Smallest M >= max(1e4, n) (doubling) with tail bound < rel_tol * variance, capped at 2^22.
std::size_t arfima_default_truncation(double d, std::size_t n, double rel_tol = 1e-4);

struct ArfimaOptions {
  ArfimaMethod method = ArfimaMethod::truncated_ma;
  std::size_t truncation = 0;
  double innovation_sd = 1.0;
};

/// Metadata keys: method, truncation, tail_variance_bound, warning (if the tail
/// tolerance could not be met).
TimeSeries gen_arfima(std::size_t n, double d, std::uint64_t seed, const ArfimaOptions& opt = {});

/// Exact Gaussian path with autocovariance acv(0..n-1) via Durbin-Levinson.
TimeSeries gen_gaussian_durbin_levinson(const AcvFunction& acv, std::size_t n, std::uint64_t seed);

/// Exact Gaussian path via circulant embedding; throws NumericError if the
/// embedding is not nonnegative definite.
TimeSeries gen_gaussian_circulant(const AcvFunction& acv, std::size_t n, std::uint64_t seed);

TimeSeries generate(const ProcessSpec& spec, std::size_t n, std::uint64_t seed);

/// gamma(0..max_lag) of the process; long_memory with D = 1 - 2d for ARFIMA d > 0.
AcvFunction theoretical_acv(const ProcessSpec& spec, std::size_t max_lag);

struct OutlierEvent {
  std::size_t index = 0;
  int sign = 0;
  double original = 0.0;
  double contaminated = 0.0;
};

struct ContaminatedSeries {
  TimeSeries series;
  std::vector<OutlierEvent> events;
};

/// X_t = Y_t + omega W_t, W_t = +-1 with probability p/2 each. Indices and signs
/// depend only on (seed, n, p).
ContaminatedSeries contaminate(const TimeSeries& y, const OutlierSpec& spec, std::uint64_t seed);

}  // namespace qnacf
