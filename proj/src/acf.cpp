#include "qnacf/acf.hpp"

#include <string>

#include "qnacf/errors.hpp"

namespace qnacf {

namespace {

void check_robust_lag(const TimeSeries& x, std::size_t h) {
  if (x.size() < 3 || h > x.size() - 3) {
    throw RangeError("robust autocovariance: lag " + std::to_string(h) +
                     " exceeds n - 3 for n = " + std::to_string(x.size()));
  }
}

void check_classical_lag(const TimeSeries& x, std::size_t h) {
  if (h >= x.size()) {
    throw RangeError("classical autocovariance: lag " + std::to_string(h) +
                     " exceeds n - 1 for n = " + std::to_string(x.size()));
  }
}

double ratio_or_throw(double num, double den, const char* what) {
  if (!(den > 0.0)) throw DegenerateSampleError(std::string(what) + ": zero scale, correlation undefined");
  return num / den;
}

}  // namespace

LagScales lag_scales(const TimeSeries& x, std::size_t h) {
  check_robust_lag(x, h);
  const auto m = static_cast<Eigen::Index>(x.size() - h);
  const Eigen::VectorXd& v = x.values();
  return {qn(v.head(m) + v.tail(m)), qn(v.head(m) - v.tail(m))};
}

AcvEstimate robust_autocov(const TimeSeries& x, std::size_t h) {
  const LagScales q = lag_scales(x, h);
  return {h, 0.25 * (q.q_plus * q.q_plus - q.q_minus * q.q_minus), AcvEstimator::robust_q,
          x.size() - h};
}

AcfSequence robust_acvf(const TimeSeries& x, std::size_t max_lag) {
  check_robust_lag(x, max_lag);
  AcfSequence out;
  out.normalization = AcfNormalization::covariance;
  out.estimator = AcvEstimator::robust_q;
  out.values.resize(static_cast<Eigen::Index>(max_lag + 1));
  for (std::size_t h = 0; h <= max_lag; ++h) {
    out.values(static_cast<Eigen::Index>(h)) = robust_autocov(x, h).value;
  }
  return out;
}

AcfSequence robust_acf(const TimeSeries& x, std::size_t max_lag, RobustCorrelation mode) {
  check_robust_lag(x, max_lag);
  AcfSequence out;
  out.normalization = AcfNormalization::correlation;
  out.estimator = AcvEstimator::robust_q;
  out.values.resize(static_cast<Eigen::Index>(max_lag + 1));
  out.values(0) = 1.0;
  if (mode == RobustCorrelation::bounded_ratio) {
    for (std::size_t h = 1; h <= max_lag; ++h) {
      const LagScales q = lag_scales(x, h);
      const double plus = q.q_plus * q.q_plus;
      const double minus = q.q_minus * q.q_minus;
      out.values(static_cast<Eigen::Index>(h)) = ratio_or_throw(plus - minus, plus + minus, "robust_acf");
    }
  } else {
    const double gamma0 = robust_autocov(x, 0).value;
    for (std::size_t h = 1; h <= max_lag; ++h) {
      out.values(static_cast<Eigen::Index>(h)) =
          ratio_or_throw(robust_autocov(x, h).value, gamma0, "robust_acf");
    }
  }
  return out;
}

AcvEstimate classical_autocov(const TimeSeries& x, std::size_t h) {
  check_classical_lag(x, h);
  const auto n = static_cast<Eigen::Index>(x.size());
  const auto m = n - static_cast<Eigen::Index>(h);
  const Eigen::ArrayXd c = x.values().array() - x.mean();
  const double s = (c.head(m) * c.tail(m)).sum();
  return {h, s / static_cast<double>(n), AcvEstimator::classical, x.size() - h};
}

AcfSequence classical_acvf(const TimeSeries& x, std::size_t max_lag) {
  check_classical_lag(x, max_lag);
  AcfSequence out;
  out.normalization = AcfNormalization::covariance;
  out.estimator = AcvEstimator::classical;
  out.values.resize(static_cast<Eigen::Index>(max_lag + 1));
  for (std::size_t h = 0; h <= max_lag; ++h) {
    out.values(static_cast<Eigen::Index>(h)) = classical_autocov(x, h).value;
  }
  return out;
}

AcfSequence classical_acf(const TimeSeries& x, std::size_t max_lag) {
  AcfSequence out = classical_acvf(x, max_lag);
  const double gamma0 = out.values(0);
  for (Eigen::Index h = 1; h < out.values.size(); ++h) {
    out.values(h) = ratio_or_throw(out.values(h), gamma0, "classical_acf");
  }
  out.values(0) = 1.0;
  out.normalization = AcfNormalization::correlation;
  return out;
}

}  // namespace qnacf
