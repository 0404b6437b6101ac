#include "qnacf/time_series.hpp"

#include "qnacf/errors.hpp"

namespace qnacf {

TimeSeries::TimeSeries(Eigen::VectorXd values, std::map<std::string, std::string> metadata)
    : values_(std::move(values)), metadata_(std::move(metadata)) {
  if (values_.size() == 0) throw ValidationError("time series must hold at least one value");
  if (!values_.allFinite()) throw ValidationError("time series values must be finite");
}

TimeSeries::TimeSeries(const std::vector<double>& values)
    : TimeSeries(Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                   static_cast<Eigen::Index>(values.size()))) {}

}  // namespace qnacf
