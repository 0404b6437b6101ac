#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace qnacf {

/// Finite, non-empty real-valued sample path with free-form provenance metadata.
class TimeSeries {
 public:
  /// Throws ValidationError if `values` is empty or holds NaN/inf.
  explicit TimeSeries(Eigen::VectorXd values, std::map<std::string, std::string> metadata = {});
  explicit TimeSeries(const std::vector<double>& values);

  const Eigen::VectorXd& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_(static_cast<Eigen::Index>(i)); }

  const std::map<std::string, std::string>& metadata() const noexcept { return metadata_; }
  void set_metadata(const std::string& key, std::string value) { metadata_[key] = std::move(value); }

  double mean() const { return values_.mean(); }

 private:
  Eigen::VectorXd values_;
  std::map<std::string, std::string> metadata_;
};

}  // namespace qnacf
