#include "qnacf/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "json.hpp"
#include "qnacf/acf.hpp"
#include "qnacf/errors.hpp"
#include "qnacf/io.hpp"
#include "qnacf/normal.hpp"
#include "qnacf/qn.hpp"
#include "qnacf/rng.hpp"

namespace qnacf {

namespace {

using nlohmann::json;

json manifest_json(const std::vector<OutlierEvent>& m) {
  json a = json::array();
  for (const auto& e : m) {
    a.push_back({{"index", e.index}, {"sign", e.sign}, {"original", e.original}, {"value", e.contaminated}});
  }
  return a;
}

json estimate_header(const EstimateReport& r) {
  json h;
  h["n"] = r.n;
  h["mean"] = r.mean;
  h["sd"] = r.sd;
  h["qn"] = r.qn;
  h["c_phi"] = r.c_phi;
  h["qn_rank"] = "floor(n^2/4) over all n^2 ordered pairs";
  h["acf_robust"] = "(Qn+^2 - Qn-^2)/(Qn+^2 + Qn-^2)";
  h["acv_robust"] = "(Qn+^2 - Qn-^2)/4";
  h["acv_classical"] = "1/n sum of mean-centred products";
  h["white_noise_band"] = r.white_noise_band;
  h["all_within_band"] = r.all_within_band;
  for (const auto& [k, v] : r.metadata) h["metadata"][k] = v;
  if (!r.manifest.empty()) h["outliers"] = manifest_json(r.manifest);
  return h;
}

std::string file_stem(const std::string& channel) {
  std::string s;
  for (char c : channel) {
    if (c == '[') s += '_';
    else if (c != ']') s += c;
  }
  return s;
}

std::string opt_short(const std::optional<double>& v) { return v ? format_short(*v) : std::string(); }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

template <typename F>
auto with_lag_context(std::size_t h, F&& f) {
  try {
    return f();
  } catch (const DegenerateSampleError& e) {
    throw DegenerateSampleError("lag " + std::to_string(h) + ": " + e.what());
  } catch (const RangeError& e) {
    throw RangeError("lag " + std::to_string(h) + ": " + e.what());
  }
}

}  // namespace

EstimateReport cmd_estimate(const TimeSeries& x, std::size_t max_lag) {
  if (x.size() < 3) throw DegenerateSampleError("estimate: need at least 3 observations");
  if (max_lag > x.size() - 3) {
    throw RangeError("estimate: max_lag " + std::to_string(max_lag) + " exceeds n - 3 = " +
                     std::to_string(x.size() - 3));
  }
  EstimateReport r;
  r.n = x.size();
  r.mean = x.mean();
  r.sd = sample_std(x).value;
  const ScaleEstimate q = qn_scale(x);
  r.qn = q.value;
  r.c_phi = gaussian_consistency_constant();
  r.metadata = x.metadata();
  if (q.degenerate) r.metadata["qn_degenerate"] = "rank falls inside the zero diagonal";
  r.white_noise_band = 2.0 / std::sqrt(static_cast<double>(r.n));
  const double c0 = classical_autocov(x, 0).value;
  if (!(c0 > 0.0)) throw DegenerateSampleError("estimate: constant series, correlations undefined");
  for (std::size_t h = 0; h <= max_lag; ++h) {
    EstimateRow row;
    row.lag = h;
    row.acv_classical = classical_autocov(x, h).value;
    row.acf_classical = h == 0 ? 1.0 : row.acv_classical / c0;
    const LagScales s = with_lag_context(h, [&] { return lag_scales(x, h); });
    const double plus = s.q_plus * s.q_plus;
    const double minus = s.q_minus * s.q_minus;
    row.acv_robust = 0.25 * (plus - minus);
    if (h == 0) {
      row.acf_robust = 1.0;
    } else {
      if (!(plus + minus > 0.0)) {
        throw DegenerateSampleError("lag " + std::to_string(h) + ": zero robust scale, correlation undefined");
      }
      row.acf_robust = (plus - minus) / (plus + minus);
      if (std::abs(row.acf_classical) > r.white_noise_band || std::abs(row.acf_robust) > r.white_noise_band) {
        r.all_within_band = false;
      }
    }
    r.rows.push_back(row);
  }
  return r;
}

std::string render_estimate(const EstimateReport& r, OutputFormat format) {
  if (format == OutputFormat::json) {
    json j = estimate_header(r);
    j["rows"] = json::array();
    for (const auto& row : r.rows) {
      const bool in_band = row.lag == 0 || (std::abs(row.acf_classical) <= r.white_noise_band &&
                                            std::abs(row.acf_robust) <= r.white_noise_band);
      j["rows"].push_back({{"lag", row.lag},
                           {"acf_classical", row.acf_classical},
                           {"acf_robust", row.acf_robust},
                           {"acv_classical", row.acv_classical},
                           {"acv_robust", row.acv_robust},
                           {"in_band", in_band}});
    }
    return j.dump(2) + "\n";
  }
  std::string s = "# " + estimate_header(r).dump() + "\n";
  s += "lag,acf_classical,acf_robust,acv_classical,acv_robust,in_band\n";
  for (const auto& row : r.rows) {
    const bool in_band = row.lag == 0 || (std::abs(row.acf_classical) <= r.white_noise_band &&
                                          std::abs(row.acf_robust) <= r.white_noise_band);
    s += std::to_string(row.lag) + "," + format_short(row.acf_classical) + "," + format_short(row.acf_robust) +
         "," + format_short(row.acv_classical) + "," + format_short(row.acv_robust) + "," +
         (in_band ? "1" : "0") + "\n";
  }
  return s;
}

Injection cmd_inject_outliers(const TimeSeries& x, const std::vector<std::size_t>& indices,
                              double magnitude_in_sds) {
  if (!std::isfinite(magnitude_in_sds)) throw ValidationError("inject-outliers: magnitude must be finite");
  std::vector<std::size_t> idx = indices;
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  for (std::size_t i : idx) {
    if (i >= x.size()) {
      throw RangeError("inject-outliers: index " + std::to_string(i) + " outside [0, " +
                       std::to_string(x.size() - 1) + "]");
    }
  }
  Injection out{x, {}};
  if (idx.empty()) return out;
  const double value = x.mean() + magnitude_in_sds * sample_std(x).value;
  Eigen::VectorXd v = x.values();
  for (std::size_t i : idx) {
    OutlierEvent e;
    e.index = i;
    e.original = v(static_cast<Eigen::Index>(i));
    e.contaminated = value;
    e.sign = value >= e.original ? 1 : -1;
    v(static_cast<Eigen::Index>(i)) = value;
    out.manifest.push_back(e);
  }
  auto meta = x.metadata();
  meta["injected"] = std::to_string(idx.size()) + " values replaced by mean + " + format_short(magnitude_in_sds) + " sd";
  out.series = TimeSeries(std::move(v), std::move(meta));
  return out;
}

std::string render_manifest(const std::vector<OutlierEvent>& manifest) {
  std::string s = "index,original,value\n";
  for (const auto& e : manifest) {
    s += std::to_string(e.index) + "," + format_exact(e.original) + "," + format_exact(e.contaminated) + "\n";
  }
  return s;
}

Simulation cmd_simulate(const SimulationConfig& config, const std::string& output) {
  config.process.validate();
  config.outliers.validate();
  const std::uint64_t pseed = derive_seed(config.seed, 0, StreamPurpose::process);
  const std::uint64_t oseed = derive_seed(config.seed, 0, StreamPurpose::outliers);
  Simulation sim{generate(config.process, config.n, pseed), {}, {}};
  if (config.outliers.active()) {
    ContaminatedSeries c = contaminate(sim.series, config.outliers, oseed);
    sim.series = std::move(c.series);
    sim.manifest = std::move(c.events);
  }
  json side = json::parse(simulation_config_json(config));
  side["process_seed"] = pseed;
  side["outlier_seed"] = oseed;
  side["description"] = config.process.describe();
  side["serialization"] = "one value per line, 17 significant digits";
  for (const auto& [k, v] : sim.series.metadata()) side["metadata"][k] = v;
  side["outliers"] = manifest_json(sim.manifest);
  sim.sidecar_json = side.dump(2) + "\n";
  if (!output.empty()) {
    write_series(output, sim.series);
    write_file_atomic(output + ".json", sim.sidecar_json);
  }
  return sim;
}

std::string render_summary_csv(const ExperimentSummary& s) {
  const auto& c = s.config;
  std::string out = "# experiment " + c.name + "; process " + c.process.describe() + "; n " + std::to_string(c.n) +
                    "; R " + std::to_string(s.replications) + "; outliers p=" + format_short(c.outliers.probability) +
                    " omega=" + format_short(c.outliers.magnitude) + "; normalization " + c.normalization.describe() +
                    "; c_phi " + format_exact(gaussian_consistency_constant()) +
                    "; qn rank floor(n^2/4); robust phi gamma_Q(1)/gamma_Q(0); classical 1/n acv\n";
  out += "channel,truth,mean,bias,sd,rmse,mse,normalized_mean,normalized_sd\n";
  for (const auto& ch : s.channels) {
    out += ch.name + "," + format_short(ch.truth) + "," + format_short(ch.mean) + "," + format_short(ch.bias) + "," +
           opt_short(ch.sd) + "," + format_short(ch.rmse) + "," + format_short(ch.mse) + "," +
           format_short(ch.normalized_mean) + "," + opt_short(ch.normalized_sd) + "\n";
  }
  return out;
}

std::string render_summary_json(const ExperimentSummary& s) {
  json j;
  j["config"] = json::parse(experiment_config_json(s.config));
  j["replications"] = s.replications;
  j["threads"] = s.threads_used;
  j["wall_seconds"] = s.wall_seconds;
  j["total_outliers"] = s.total_outliers;
  j["c_phi"] = gaussian_consistency_constant();
  j["normalization"] = s.config.normalization.describe();
  j["channels"] = json::array();
  for (const auto& ch : s.channels) {
    j["channels"].push_back({{"name", ch.name},
                             {"truth", ch.truth},
                             {"mean", ch.mean},
                             {"bias", ch.bias},
                             {"sd", opt_json(ch.sd)},
                             {"rmse", ch.rmse},
                             {"mse", ch.mse},
                             {"normalized_mean", ch.normalized_mean},
                             {"normalized_sd", opt_json(ch.normalized_sd)},
                             {"histogram", {{"edges", ch.histogram.edges}, {"counts", ch.histogram.counts}}}});
  }
  if (!s.are.empty()) {
    j["are"] = json::array();
    for (const auto& a : s.are) {
      j["are"].push_back({{"lag", a.lag}, {"value", a.value}, {"se", a.standard_error}, {"analytic", opt_json(a.analytic)}});
    }
  }
  return j.dump(2) + "\n";
}

ExperimentOutcome cmd_experiment(const ExperimentConfig& config, const std::string& output_dir, bool full_scale) {
  ExperimentOutcome out;
  const std::size_t R = full_scale ? config.full_scale_replications : config.replications;
  out.summary = run_experiment(config, R);
  out.checks = evaluate_checks(out.summary, full_scale ? std::sqrt(5.0) : 1.0);
  out.all_passed = std::all_of(out.checks.begin(), out.checks.end(), [](const CheckResult& c) { return c.pass; });
  if (output_dir.empty()) return out;

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) throw IoError("cannot create directory '" + output_dir + "'");
  const fs::path dir(output_dir);
  const auto& s = out.summary;
  write_file_atomic((dir / "summary.csv").string(), render_summary_csv(s));
  write_file_atomic((dir / "summary.json").string(), render_summary_json(s));

  std::string errs;
  for (std::size_t c = 0; c < s.channels.size(); ++c) errs += (c ? "," : "") + s.channels[c].name;
  errs += "\n";
  for (std::size_t r = 0; r < s.replications; ++r) {
    for (std::size_t c = 0; c < s.channels.size(); ++c) {
      errs += (c ? "," : "") + format_exact(s.channels[c].normalized_errors(static_cast<Eigen::Index>(r)));
    }
    errs += "\n";
  }
  write_file_atomic((dir / "normalized_errors.csv").string(), errs);

  for (const auto& ch : s.channels) {
    std::string h = "# normalized errors " + s.config.normalization.describe() + " * (" + ch.name + " - " +
                    format_exact(ch.truth) + "), Freedman-Diaconis bins\nleft,right,count,density\n";
    const double total = static_cast<double>(s.replications);
    for (std::size_t b = 0; b < ch.histogram.counts.size(); ++b) {
      const double w = ch.histogram.edges[b + 1] - ch.histogram.edges[b];
      h += format_short(ch.histogram.edges[b]) + "," + format_short(ch.histogram.edges[b + 1]) + "," +
           std::to_string(ch.histogram.counts[b]) + "," +
           format_short(static_cast<double>(ch.histogram.counts[b]) / (total * w)) + "\n";
    }
    write_file_atomic((dir / ("hist_" + file_stem(ch.name) + ".csv")).string(), h);
  }

  if (!s.are.empty()) {
    std::string a = "# ARE(h) = Var(classical acv) / Var(robust acv), classical rescaled by n/(n-h), over R = " + std::to_string(s.replications) +
                    " replications\nlag,are,se,analytic\n";
    for (const auto& e : s.are) {
      a += std::to_string(e.lag) + "," + format_short(e.value) + "," + format_short(e.standard_error) + "," +
           opt_short(e.analytic) + "\n";
    }
    write_file_atomic((dir / "are.csv").string(), a);
  }
  return out;
}

}  // namespace qnacf
