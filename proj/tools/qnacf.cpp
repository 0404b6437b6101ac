// qnacf: robust scale / autocorrelation reports, simulation and Monte-Carlo experiments.
//
// Exit codes: 0 success, 2 invalid input or arguments, 3 numerical failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qnacf/commands.hpp"
#include "qnacf/config.hpp"
#include "qnacf/errors.hpp"
#include "qnacf/io.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

qnacf::TimeSeries read_input(const std::string& path, const std::string& column) {
  qnacf::IngestOptions opt;
  if (!column.empty()) {
    opt.format = qnacf::SeriesFormat::csv;
    opt.column = column;
  }
  return qnacf::ingest_series(path, opt);
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    qnacf::write_file_atomic(path, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust (Qn) and classical scale / autocorrelation toolkit"};
  app.require_subcommand(1);

  std::string input;
  std::string output;
  std::string column;
  std::string config_path;
  std::string format = "csv";
  std::optional<std::size_t> max_lag;
  std::optional<std::uint64_t> seed;
  bool full_scale = false;

  auto* est = app.add_subcommand("estimate", "Classical and robust ACF report for a series file");
  est->add_option("--input", input, "Series file (one value per line, or CSV with --column)")->required();
  est->add_option("--column", column, "CSV column name (header) or 0-based index");
  est->add_option("--max-lag", max_lag, "Largest lag (default min(20, n-3))");
  est->add_option("--output", output, "Report path, '-' for stdout")->default_str("-");
  est->add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}));

  std::vector<std::size_t> indices;
  double magnitude = 0.0;
  std::string manifest_path;
  auto* inj = app.add_subcommand("inject-outliers", "Replace values at indices by mean + k sd");
  inj->add_option("--input", input, "Series file")->required();
  inj->add_option("--column", column, "CSV column name (header) or 0-based index");
  inj->add_option("--output", output, "Output series file")->required();
  inj->add_option("--indices", indices, "0-based indices, comma separated")->delimiter(',');
  inj->add_option("--magnitude", magnitude, "k, in sample standard deviations")->required();
  inj->add_option("--manifest", manifest_path, "Manifest CSV (default <output>.manifest.csv)");

  std::string process = "white_noise";
  double phi = 0.0;
  double d = 0.0;
  double epsilon = 0.4;
  std::size_t n = 500;
  double outlier_p = 0.0;
  double outlier_omega = 0.0;
  std::string arfima_method = "truncated_ma";
  auto* sim = app.add_subcommand("simulate", "Write a seeded sample path and its JSON sidecar");
  sim->add_option("--config", config_path, "Simulation config (JSON); flags below are ignored when given");
  sim->add_option("--output", output, "Series file; sidecar goes to <output>.json")->required();
  sim->add_option("--seed", seed, "Seed (default 1)");
  sim->add_option("--process", process, "Process family")
      ->check(CLI::IsMember({"white_noise", "ar1", "arfima", "ar1_skewed"}));
  sim->add_option("--phi", phi, "AR coefficient");
  sim->add_option("--d", d, "Fractional differencing parameter");
  sim->add_option("--epsilon", epsilon, "Skewness weight for ar1_skewed");
  sim->add_option("--n", n, "Length");
  sim->add_option("--outlier-p", outlier_p, "Additive outlier probability");
  sim->add_option("--outlier-omega", outlier_omega, "Additive outlier magnitude");
  sim->add_option("--arfima-method", arfima_method, "ARFIMA generator")
      ->check(CLI::IsMember({"truncated_ma", "circulant_embedding", "durbin_levinson"}));

  std::optional<std::size_t> threads;
  auto* exp = app.add_subcommand("experiment", "Run a Monte-Carlo experiment from a config file");
  exp->add_option("--config", config_path, "Experiment config (JSON)")->required();
  exp->add_option("--output", output, "Output directory")->required();
  exp->add_option("--seed", seed, "Override master_seed");
  exp->add_option("--threads", threads, "Worker threads (default: all cores)");
  exp->add_flag("--full-scale", full_scale, "Use full_scale_replications and sqrt(5)-tighter tolerances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*est) {
      const qnacf::TimeSeries x = read_input(input, column);
      const std::size_t lag = max_lag ? *max_lag : (x.size() >= 23 ? 20 : (x.size() >= 3 ? x.size() - 3 : 0));
      const auto report = qnacf::cmd_estimate(x, lag);
      emit(output, qnacf::render_estimate(report, format == "json" ? qnacf::OutputFormat::json
                                                                   : qnacf::OutputFormat::csv));
    } else if (*inj) {
      const qnacf::TimeSeries x = read_input(input, column);
      const auto res = qnacf::cmd_inject_outliers(x, indices, magnitude);
      qnacf::write_series(output, res.series);
      qnacf::write_file_atomic(manifest_path.empty() ? output + ".manifest.csv" : manifest_path,
                               qnacf::render_manifest(res.manifest));
    } else if (*sim) {
      qnacf::SimulationConfig cfg;
      if (!config_path.empty()) {
        cfg = qnacf::load_simulation_config(config_path);
      } else {
        std::string text = "{\"process\":\"" + process + "\",\"n\":" + std::to_string(n) +
                           ",\"phi\":" + qnacf::format_exact(phi) + ",\"d\":" + qnacf::format_exact(d) +
                           ",\"outlier_probability\":" + qnacf::format_exact(outlier_p) +
                           ",\"outlier_magnitude\":" + qnacf::format_exact(outlier_omega) +
                           ",\"arfima_method\":\"" + arfima_method + "\"";
        if (process == "ar1_skewed") text += ",\"epsilon\":" + qnacf::format_exact(epsilon);
        cfg = qnacf::parse_simulation_config(text + "}");
      }
      if (seed) cfg.seed = *seed;
      qnacf::cmd_simulate(cfg, output);
    } else if (*exp) {
      qnacf::ExperimentConfig cfg = qnacf::load_experiment_config(config_path);
      if (seed) cfg.master_seed = *seed;
      if (threads) cfg.threads = *threads;
      const auto outcome = qnacf::cmd_experiment(cfg, output, full_scale);
      std::printf("%s: R=%zu, %.1f s\n", cfg.name.c_str(), outcome.summary.replications,
                  outcome.summary.wall_seconds);
      for (const auto& c : outcome.checks) std::printf("%s\n", c.line().c_str());
    }
  } catch (const qnacf::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const qnacf::RangeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const qnacf::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  }
  return 0;
}
