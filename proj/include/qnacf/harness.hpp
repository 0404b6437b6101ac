#pragma once

// Seeded Monte-Carlo experiments: replicate (generate, contaminate, estimate),
// aggregate per estimator channel, compare against reference constants.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qnacf/acf.hpp"
#include "qnacf/procgen.hpp"

namespace qnacf {

/// Estimator families a config can request. acv_* are expanded per lag.
inline constexpr const char* kEstimatorTags[] = {"qn", "sd", "acv_robust", "acv_classical",
                                                 "phi_robust", "phi_classical"};

/// Errors are scaled by n^exponent (exponent = 1/2 for sqrt_n).
struct Normalization {
  enum class Kind { sqrt_n, n_pow };
  Kind kind = Kind::sqrt_n;
  double exponent = 0.5;

  double factor(std::size_t n) const;
  std::string describe() const;
};

/// One pass/fail comparison of a summary statistic against a reference constant.
struct Check {
  std::string channel;      // e.g. "qn", "acv_robust[1]", "are"
  std::string statistic;    // mean, bias, sd, rmse, mse, norm_mean, norm_sd, min, max
  std::string mode = "abs"; // abs: |obs - target| <= tol; rel: <= tol |target|; le; ge; range
  double target = 0.0;
  double tolerance = 0.0;
  double lower = 0.0;  // range mode
  double upper = 0.0;
  std::string note;  // where the reference value comes from
};

struct ExperimentConfig {
  std::string name = "experiment";
  ProcessSpec process;
  OutlierSpec outliers;
  std::size_t n = 500;
  std::size_t replications = 1000;
  std::size_t full_scale_replications = 5000;
  std::uint64_t master_seed = 1;
  std::vector<std::string> estimators = {"qn", "sd"};
  std::vector<std::size_t> lags = {1};
  std::size_t are_max_lag = 0;  // > 0 adds acv channels for 1..are_max_lag and an ARE table
  Normalization normalization;
  std::map<std::string, double> truth;  // per-channel overrides of the theoretical value
  std::string target_note;
  std::vector<Check> checks;
  std::size_t threads = 0;  // 0 = hardware concurrency

  /// Throws ValidationError (naming the offending field) on violations.
  void validate() const;
  /// Ordered channel names, e.g. qn, sd, acv_robust[1], ..., phi_classical.
  std::vector<std::string> channels() const;
  /// Lags whose autocovariances are needed by the requested channels.
  std::vector<std::size_t> required_lags() const;
};

struct ReplicationRecord {
  std::size_t index = 0;
  std::uint64_t process_seed = 0;
  std::uint64_t outlier_seed = 0;
  std::size_t outlier_count = 0;
  std::vector<double> values;  // aligned with ExperimentConfig::channels()
};

struct Histogram {
  std::vector<double> edges;  // counts.size() + 1 edges
  std::vector<std::size_t> counts;
};

/// Freedman-Diaconis bins (width 2 IQR R^{-1/3}); one bin if the IQR is 0.
Histogram freedman_diaconis_histogram(const Eigen::VectorXd& data, std::size_t max_bins = 200);

struct ChannelSummary {
  std::string name;
  double truth = 0.0;
  double mean = 0.0;
  double bias = 0.0;
  std::optional<double> sd;  // absent when R = 1
  double rmse = 0.0;
  double mse = 0.0;
  double normalized_mean = 0.0;
  std::optional<double> normalized_sd;
  Histogram histogram;  // of normalized errors
  Eigen::VectorXd values;
  Eigen::VectorXd normalized_errors;
};

struct AreEstimate {
  std::size_t lag = 0;
  double value = 0.0;
  double standard_error = 0.0;
  std::optional<double> analytic;
};

struct ExperimentSummary {
  ExperimentConfig config;
  std::size_t replications = 0;
  std::size_t threads_used = 1;
  double wall_seconds = 0.0;
  std::size_t total_outliers = 0;
  std::vector<ChannelSummary> channels;
  std::vector<AreEstimate> are;

  const ChannelSummary& channel(const std::string& name) const;
};

/// phi_1 = rho(1). Throws ValidationError without lag 1 or with covariance normalisation.
double yule_walker_ar1(const AcfSequence& acf);

/// Theoretical value of every channel (sigma_Y, gamma(h), phi), with config overrides.
std::map<std::string, double> channel_truths(const ExperimentConfig& config);

ReplicationRecord run_replication(const ExperimentConfig& config, std::size_t r);

/// `replications` overrides config.replications when nonzero.
ExperimentSummary run_experiment(const ExperimentConfig& config, std::size_t replications = 0);

/// Var(classical acv[h]) / Var(robust acv[h]) over the replications, h = 1..max_lag,
/// with a delta-method standard error from the paired replications.
std::vector<AreEstimate> empirical_are(const ExperimentSummary& summary, std::size_t max_lag);

struct CheckResult {
  Check check;
  double observed = 0.0;
  double tolerance_used = 0.0;
  bool pass = false;
  std::string line() const;
};

/// Tolerances are divided by tolerance_divisor (sqrt(5) in full-scale mode).
std::vector<CheckResult> evaluate_checks(const ExperimentSummary& summary, double tolerance_divisor = 1.0);

}  // namespace qnacf
