#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include <sys/wait.h>

#include "json.hpp"
#include "qnacf/acf.hpp"
#include "qnacf/commands.hpp"
#include "qnacf/errors.hpp"
#include "qnacf/io.hpp"
#include "qnacf/qn.hpp"

using namespace qnacf;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("qnacf_cli_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

int run(const std::string& args) {
  const std::string cmd = std::string(QNACF_CLI_PATH) + " " + args + " >" + (scratch() / "stdout.txt").string() +
                          " 2>" + (scratch() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("ingest") {
  const fs::path one = scratch() / "one.txt";
  spit(one, "3.5\n");
  CHECK(ingest_series(one.string()).size() == 1);

  const fs::path gaps = scratch() / "gaps.txt";
  spit(gaps, "# comment\n1\n\n  2.5 \n-3e2\n");
  const TimeSeries g = ingest_series(gaps.string());
  REQUIRE(g.size() == 3);
  CHECK(g[2] == -300.0);

  const fs::path bad = scratch() / "bad.txt";
  spit(bad, "1\n2\n3\n4\n5\n6\nNaN\n8\n");
  try {
    ingest_series(bad.string());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 7);
  }
  spit(bad, "1\nabc\n");
  CHECK_THROWS_AS(ingest_series(bad.string()), ParseError);
  spit(bad, "1\ninf\n");
  CHECK_THROWS_AS(ingest_series(bad.string()), ParseError);
  CHECK_THROWS_AS(ingest_series((scratch() / "missing.txt").string()), IoError);

  const fs::path csv = scratch() / "t.csv";
  spit(csv, "year,flow\n622,1157\n623,1088\n\n624,1169\n");
  IngestOptions byname{SeriesFormat::csv, "flow"};
  CHECK(ingest_series(csv.string(), byname).values() == Eigen::Vector3d(1157, 1088, 1169));
  spit(csv, "622,1157\n623,1088\n");
  IngestOptions byindex{SeriesFormat::csv, "1"};
  CHECK(ingest_series(csv.string(), byindex)[1] == 1088);
}

TEST_CASE("simulate round trip is bit exact") {
  SimulationConfig cfg;
  cfg.process.kind = Ar1{0.5};
  cfg.n = 400;
  cfg.seed = 99;
  cfg.outliers = {0.05, 10.0};
  const fs::path out = scratch() / "sim.txt";
  const Simulation sim = cmd_simulate(cfg, out.string());
  const TimeSeries back = ingest_series(out.string());
  CHECK(back.values() == sim.series.values());
  const auto side = nlohmann::json::parse(slurp(out.string() + ".json"));
  CHECK(side.at("seed") == 99);
  CHECK(side.at("outliers").size() == sim.manifest.size());

  const fs::path again = scratch() / "sim2.txt";
  cmd_simulate(cfg, again.string());
  CHECK(slurp(out) == slurp(again));
  CHECK(slurp(out.string() + ".json") == slurp(again.string() + ".json"));

  SimulationConfig f;
  f.process.kind = Arfima{0.2};
  f.n = 500;
  f.seed = 5;
  const double sd = sample_std(cmd_simulate(f).series).value;
  CHECK(sd >= 0.9);
  CHECK(sd <= 1.2);
}

TEST_CASE("estimate report") {
  const TimeSeries x = gen_white_noise(2000, 3);
  const EstimateReport r = cmd_estimate(x, 20);
  REQUIRE(r.rows.size() == 21);
  bool all = true;
  for (std::size_t h = 0; h < r.rows.size(); ++h) {
    CHECK(r.rows[h].lag == h);
    if (h > 0) {
      all = all && std::abs(r.rows[h].acf_classical) <= 2 / std::sqrt(2000.0) &&
            std::abs(r.rows[h].acf_robust) <= 2 / std::sqrt(2000.0);
    }
  }
  CHECK(r.all_within_band == all);
  CHECK(r.rows[3].acv_robust == doctest::Approx(robust_autocov(x, 3).value));
  CHECK(r.rows[3].acf_robust == doctest::Approx(robust_acf(x, 3)[3]));
  CHECK(r.rows[3].acf_classical == doctest::Approx(classical_acf(x, 3)[3]));
  CHECK(r.c_phi == gaussian_consistency_constant());

  const EstimateReport zero = cmd_estimate(x, 0);
  REQUIRE(zero.rows.size() == 1);
  CHECK(zero.rows[0].acf_classical == 1.0);
  CHECK(zero.rows[0].acf_robust == 1.0);

  const std::string csv = render_estimate(r, OutputFormat::csv);
  CHECK(csv.rfind("# {", 0) == 0);
  CHECK(csv.find("lag,acf_classical,acf_robust,acv_classical,acv_robust") != std::string::npos);
  const auto j = nlohmann::json::parse(render_estimate(r, OutputFormat::json));
  CHECK(j.at("rows").size() == 21);
  CHECK(j.at("n") == 2000);

  CHECK_THROWS_AS(cmd_estimate(x, 1998), RangeError);
}

TEST_CASE("outlier injection replaces values") {
  const TimeSeries x = gen_ar1(300, 0.6, 4);
  const Injection none = cmd_inject_outliers(x, {}, 10.0);
  CHECK(none.series.values() == x.values());
  CHECK(none.manifest.empty());

  const Injection zero = cmd_inject_outliers(x, {5}, 0.0);
  CHECK(zero.series[5] == doctest::Approx(x.mean()));

  const Injection ten = cmd_inject_outliers(x, {3, 100, 250}, 10.0);
  const double target = x.mean() + 10.0 * sample_std(x).value;
  REQUIRE(ten.manifest.size() == 3);
  CHECK(ten.manifest[1].index == 100);
  CHECK(ten.manifest[1].original == x[100]);
  for (std::size_t i : {3u, 100u, 250u}) CHECK(ten.series[i] == target);
  CHECK(ten.series[4] == x[4]);
  const double rc = robust_acf(x, 1)[1];
  const double ri = robust_acf(ten.series, 1)[1];
  const double cc = classical_acf(x, 1)[1];
  const double ci = classical_acf(ten.series, 1)[1];
  CHECK(std::abs(ri - rc) < std::abs(ci - cc));
  CHECK_THROWS_AS(cmd_inject_outliers(x, {300}, 5.0), RangeError);
}

TEST_CASE("Nile series, when available") {
  const char* path = std::getenv("QNACF_NILE_PATH");
  if (path == nullptr) {
    MESSAGE("QNACF_NILE_PATH not set; skipping");
    return;
  }
  const TimeSeries x = ingest_series(path);
  CHECK(x.size() == 663);
  CHECK(x.mean() == doctest::Approx(1148).epsilon(0.001));
  CHECK(sample_std(x).value == doctest::Approx(89.05).epsilon(0.001));
  const Injection inj = cmd_inject_outliers(x, {24, 187, 256}, 10.0);
  const double rc = robust_acf(x, 1)[1];
  const double ri = robust_acf(inj.series, 1)[1];
  CHECK(std::abs(ri - rc) < 0.05 * std::abs(rc));
  CHECK(classical_acf(inj.series, 1)[1] < classical_acf(x, 1)[1] - 0.1);
}

TEST_CASE("command line: verbs and exit codes") {
  const fs::path series = scratch() / "cli.txt";
  CHECK(run("simulate --process ar1 --phi 0.4 --n 300 --seed 4 --output " + series.string()) == 0);
  CHECK(ingest_series(series.string()).size() == 300);
  CHECK(fs::exists(series.string() + ".json"));

  const fs::path report = scratch() / "report.csv";
  CHECK(run("estimate --input " + series.string() + " --max-lag 5 --output " + report.string()) == 0);
  CHECK(slurp(report).find("\n5,") != std::string::npos);
  CHECK(run("estimate --input " + series.string() + " --max-lag 5 --format json --output " +
            (scratch() / "report.json").string()) == 0);
  CHECK(nlohmann::json::parse(slurp(scratch() / "report.json")).at("rows").size() == 6);

  const fs::path injected = scratch() / "inj.txt";
  CHECK(run("inject-outliers --input " + series.string() + " --indices 1,2 --magnitude 5 --output " +
            injected.string()) == 0);
  CHECK(slurp(injected.string() + ".manifest.csv").find("index,original,value") == 0);

  const fs::path bad = scratch() / "nan.txt";
  spit(bad, "1\n2\nnan\n");
  CHECK(run("estimate --input " + bad.string()) == 2);
  CHECK(slurp(scratch() / "stderr.txt").find(":3:") != std::string::npos);
  CHECK(run("estimate --input " + series.string() + " --max-lag 298") == 2);
  CHECK(run("estimate --input " + (scratch() / "absent.txt").string()) == 2);
  CHECK(run("estimate --input " + series.string() + " --format xml") == 2);
  CHECK(run("simulate --process ar1 --phi 1.2 --output " + (scratch() / "x.txt").string()) == 2);
  CHECK(run("inject-outliers --input " + series.string() + " --indices 300 --magnitude 5 --output " +
            injected.string()) == 2);
  CHECK(run("frobnicate") == 2);

  const fs::path flat = scratch() / "flat.txt";
  spit(flat, "1\n1\n1\n1\n1\n1\n");
  CHECK(run("estimate --input " + flat.string() + " --max-lag 1") == 3);
}

TEST_CASE("command line: experiments") {
  const fs::path cfg = scratch() / "r1.json";
  spit(cfg, R"({"name": "r1", "process": "ar1", "phi": 0.2, "n": 100, "replications": 1,
                "estimators": ["qn", "sd", "phi_classical"]})");
  const fs::path out = scratch() / "r1_out";
  CHECK(run("experiment --config " + cfg.string() + " --output " + out.string()) == 0);
  const std::string summary = slurp(out / "summary.csv");
  CHECK(summary.find("c_phi 2.2191444659850") != std::string::npos);
  CHECK(summary.find("\nqn,") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(j.at("channels").at(0).at("sd").is_null());
  CHECK(fs::exists(out / "hist_qn.csv"));
  CHECK(fs::exists(out / "normalized_errors.csv"));

  spit(cfg, R"({"name": "broken", "n": 3})");
  CHECK(run("experiment --config " + cfg.string() + " --output " + out.string()) == 2);
  CHECK(slurp(scratch() / "stderr.txt").find("n") != std::string::npos);
  spit(cfg, R"({"name": "broken", "replications": -1})");
  CHECK(run("experiment --config " + cfg.string() + " --output " + out.string()) == 2);
  CHECK(slurp(scratch() / "stderr.txt").find("'replications'") != std::string::npos);

  const fs::path t1 = scratch() / "table1";
  CHECK(run("experiment --config " + std::string(QNACF_CONFIG_DIR) + "/yw_ar1_phi02_clean.json --output " +
            t1.string()) == 0);
  const std::string lines = slurp(scratch() / "stdout.txt");
  CHECK(lines.find("PASS phi_classical mean") != std::string::npos);
  CHECK(lines.find("FAIL") == std::string::npos);

  const fs::path are = scratch() / "are";
  CHECK(run("experiment --config " + std::string(QNACF_CONFIG_DIR) + "/are_ar1_phi05.json --output " +
            are.string()) == 0);
  CHECK(slurp(scratch() / "stdout.txt").find("FAIL") == std::string::npos);
  CHECK(slurp(are / "are.csv").find("\n60,") != std::string::npos);
}
