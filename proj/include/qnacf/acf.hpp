#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "qnacf/qn.hpp"
#include "qnacf/time_series.hpp"

namespace qnacf {

enum class AcvEstimator { robust_q, classical };

struct AcvEstimate {
  std::size_t lag = 0;
  double value = 0.0;
  AcvEstimator estimator = AcvEstimator::classical;
  std::size_t n_effective = 0;  // n - lag
};

enum class AcfNormalization { covariance, correlation };

/// How robust autocorrelations are normalised.
enum class RobustCorrelation {
  /// (Q+^2 - Q-^2) / (Q+^2 + Q-^2), always in [-1, 1].
  bounded_ratio,
  /// gamma_Q(h) / gamma_Q(0); may leave [-1, 1] on finite samples.
  covariance_ratio,
};

/// Estimated autocovariances or autocorrelations at lags 0..max_lag().
struct AcfSequence {
  Eigen::VectorXd values;
  AcfNormalization normalization = AcfNormalization::correlation;
  AcvEstimator estimator = AcvEstimator::classical;

  std::size_t max_lag() const { return static_cast<std::size_t>(values.size()) - 1; }
  double operator[](std::size_t h) const { return values(static_cast<Eigen::Index>(h)); }
};

/// Qn of the lag-h sum and difference vectors x_{1:n-h} +- x_{h+1:n}.
struct LagScales {
  double q_plus = 0.0;
  double q_minus = 0.0;
};

LagScales lag_scales(const TimeSeries& x, std::size_t h);

/// gamma_Q(h) = (Qn^2(sum) - Qn^2(diff)) / 4. Requires h <= n - 3.
AcvEstimate robust_autocov(const TimeSeries& x, std::size_t h);

/// Robust autocorrelations for lags 0..max_lag (max_lag <= n - 3), 1 at lag 0.
AcfSequence robust_acf(const TimeSeries& x, std::size_t max_lag,
                       RobustCorrelation mode = RobustCorrelation::bounded_ratio);

/// Robust autocovariances gamma_Q(0..max_lag). Not guaranteed positive semi-definite.
AcfSequence robust_acvf(const TimeSeries& x, std::size_t max_lag);

/// Biased (1/n) sample autocovariance about the sample mean. Requires h <= n - 1.
AcvEstimate classical_autocov(const TimeSeries& x, std::size_t h);

AcfSequence classical_acvf(const TimeSeries& x, std::size_t max_lag);
AcfSequence classical_acf(const TimeSeries& x, std::size_t max_lag);

}  // namespace qnacf
