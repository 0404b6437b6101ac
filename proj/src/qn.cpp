#include "qnacf/qn.hpp"

namespace qnacf {

std::int64_t qn_rank(std::size_t n, QnVariant variant) {
  if (n < 3) throw DegenerateSampleError("Qn needs at least 3 observations");
  const auto m = static_cast<std::int64_t>(n);
  switch (variant) {
    case QnVariant::quartile:
      return m * m / 4;
    case QnVariant::off_diagonal:
      return m * (m - 1) / 4;
    case QnVariant::rousseeuw_croux: {
      const std::int64_t h = m / 2 + 1;
      return h * (h - 1) / 2;
    }
  }
  throw ValidationError("unknown Qn variant");
}

ScaleEstimate qn_scale(const TimeSeries& x, QnVariant variant) {
  ScaleEstimate est;
  est.estimator = ScaleEstimator::robust_qn;
  est.n = x.size();
  est.constant = gaussian_consistency_constant();
  est.value = qn(x.values(), variant);
  est.degenerate = variant == QnVariant::quartile &&
                   qn_rank(x.size(), variant) <= static_cast<std::int64_t>(x.size());
  return est;
}

ScaleEstimate sample_std(const TimeSeries& x) {
  const std::size_t n = x.size();
  if (n < 2) throw DegenerateSampleError("sample standard deviation needs at least 2 observations");
  const Eigen::ArrayXd centered = x.values().array() - x.mean();
  ScaleEstimate est;
  est.estimator = ScaleEstimator::classical_std;
  est.n = n;
  est.constant = 1.0;
  est.value = std::sqrt(centered.square().sum() / static_cast<double>(n - 1));
  return est;
}

}  // namespace qnacf
