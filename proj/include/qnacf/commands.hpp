#pragma once

// The CLI verbs as library calls: each computes a result and, given a path, writes it.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qnacf/config.hpp"
#include "qnacf/harness.hpp"
#include "qnacf/procgen.hpp"
#include "qnacf/time_series.hpp"

namespace qnacf {

enum class OutputFormat { csv, json };

struct EstimateRow {
  std::size_t lag = 0;
  double acf_classical = 0.0;
  double acf_robust = 0.0;
  double acv_classical = 0.0;
  double acv_robust = 0.0;
};

struct EstimateReport {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double qn = 0.0;
  double c_phi = 0.0;
  /// 2/sqrt(n); a lag is in band if both autocorrelations lie within +-band.
  double white_noise_band = 0.0;
  bool all_within_band = true;
  std::vector<EstimateRow> rows;
  std::vector<OutlierEvent> manifest;
  std::map<std::string, std::string> metadata;
};

/// Needs n >= 3 and max_lag <= n - 3.
EstimateReport cmd_estimate(const TimeSeries& x, std::size_t max_lag);

/// csv: a '# {json header}' line, then lag,acf_classical,acf_robust,acv_classical,acv_robust,in_band.
std::string render_estimate(const EstimateReport& report, OutputFormat format);

struct Injection {
  TimeSeries series;
  std::vector<OutlierEvent> manifest;
};

/// Replaces x[i] by mean + magnitude_in_sds * sd (moments of the original) for each index.
Injection cmd_inject_outliers(const TimeSeries& x, const std::vector<std::size_t>& indices,
                              double magnitude_in_sds);

std::string render_manifest(const std::vector<OutlierEvent>& manifest);

struct Simulation {
  TimeSeries series;
  std::vector<OutlierEvent> manifest;
  std::string sidecar_json;
};

/// Writes the series to `output` and the sidecar to `output + ".json"` when output is non-empty.
Simulation cmd_simulate(const SimulationConfig& config, const std::string& output = {});

struct ExperimentOutcome {
  ExperimentSummary summary;
  std::vector<CheckResult> checks;
  bool all_passed = true;
};

/// Runs the experiment and writes summary.csv, summary.json, normalized_errors.csv,
/// hist_<channel>.csv and (with an ARE table) are.csv into output_dir.
ExperimentOutcome cmd_experiment(const ExperimentConfig& config, const std::string& output_dir,
                                 bool full_scale = false);

std::string render_summary_csv(const ExperimentSummary& summary);
std::string render_summary_json(const ExperimentSummary& summary);

}  // namespace qnacf
