#include "qnacf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include "qnacf/errors.hpp"
#include "qnacf/qn.hpp"
#include "qnacf/rng.hpp"

namespace qnacf {

namespace {

/// Neumaier-compensated running sum; fixed input order gives fixed output.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double mean_of(const Eigen::VectorXd& v) {
  CompensatedSum s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s.add(v(i));
  return s.value() / static_cast<double>(v.size());
}

/// Unbiased sample variance; needs at least two values.
double variance_of(const Eigen::VectorXd& v) {
  const double m = mean_of(v);
  CompensatedSum s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s.add((v(i) - m) * (v(i) - m));
  return s.value() / static_cast<double>(v.size() - 1);
}

double quantile_sorted(const std::vector<double>& s, double p) {
  const double pos = p * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

std::string acv_name(const char* tag, std::size_t h) { return std::string(tag) + "[" + std::to_string(h) + "]"; }

bool is_known_tag(const std::string& t) {
  return std::any_of(std::begin(kEstimatorTags), std::end(kEstimatorTags),
                     [&](const char* k) { return t == k; });
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const std::set<std::string> kStatistics = {"mean", "bias", "sd", "rmse", "mse", "norm_mean", "norm_sd", "min", "max"};
const std::set<std::string> kModes = {"abs", "rel", "le", "ge", "range"};

}  // namespace

double Normalization::factor(std::size_t n) const {
  const double nd = static_cast<double>(n);
  return kind == Kind::sqrt_n ? std::sqrt(nd) : std::pow(nd, exponent);
}

std::string Normalization::describe() const {
  return kind == Kind::sqrt_n ? std::string("sqrt_n") : "n_pow(" + fmt6(exponent) + ")";
}

void ExperimentConfig::validate() const {
  process.validate();
  outliers.validate();
  if (n < 10) throw ValidationError("n: must be at least 10");
  if (replications < 1) throw ValidationError("replications: must be at least 1");
  if (full_scale_replications < 1) throw ValidationError("full_scale_replications: must be at least 1");
  if (estimators.empty() && are_max_lag == 0) throw ValidationError("estimators: empty");
  for (const auto& e : estimators) {
    if (!is_known_tag(e)) throw ValidationError("estimators: unknown tag '" + e + "'");
  }
  for (std::size_t h : required_lags()) {
    if (h + 3 > n) throw ValidationError("lags: lag " + std::to_string(h) + " exceeds n - 3");
  }
  if (normalization.kind == Normalization::Kind::n_pow && !(normalization.exponent > 0.0)) {
    throw ValidationError("exponent: must be positive");
  }
  const auto names = channels();
  for (const auto& c : checks) {
    const bool known = c.channel == "are" ? are_max_lag > 0
                                          : std::find(names.begin(), names.end(), c.channel) != names.end();
    if (!known) throw ValidationError("checks.channel: unknown channel '" + c.channel + "'");
    if (!kStatistics.count(c.statistic)) throw ValidationError("checks.statistic: unknown '" + c.statistic + "'");
    if (!kModes.count(c.mode)) throw ValidationError("checks.mode: unknown '" + c.mode + "'");
    if (c.tolerance < 0.0) throw ValidationError("checks.tolerance: must be nonnegative");
  }
  for (const auto& [k, v] : truth) {
    if (std::find(names.begin(), names.end(), k) == names.end()) {
      throw ValidationError("targets: unknown channel '" + k + "'");
    }
    if (!std::isfinite(v)) throw ValidationError("targets: non-finite value for '" + k + "'");
  }
}

std::vector<std::size_t> ExperimentConfig::required_lags() const {
  std::set<std::size_t> out;
  const auto has = [&](const char* t) { return std::find(estimators.begin(), estimators.end(), t) != estimators.end(); };
  if (has("acv_robust") || has("acv_classical") || are_max_lag > 0) {
    out.insert(lags.begin(), lags.end());
    for (std::size_t h = 1; h <= are_max_lag; ++h) out.insert(h);
  }
  if (has("phi_robust") || has("phi_classical")) {
    out.insert(0);
    out.insert(1);
  }
  return {out.begin(), out.end()};
}

std::vector<std::string> ExperimentConfig::channels() const {
  std::set<std::size_t> acv_lags(lags.begin(), lags.end());
  for (std::size_t h = 1; h <= are_max_lag; ++h) acv_lags.insert(h);
  std::vector<std::string> out;
  std::vector<std::string> tags = estimators;
  if (are_max_lag > 0) {
    for (const char* t : {"acv_robust", "acv_classical"}) {
      if (std::find(tags.begin(), tags.end(), t) == tags.end()) tags.emplace_back(t);
    }
  }
  for (const auto& t : tags) {
    if (t == "acv_robust" || t == "acv_classical") {
      for (std::size_t h : acv_lags) out.push_back(acv_name(t.c_str(), h));
    } else {
      out.push_back(t);
    }
  }
  return out;
}

Histogram freedman_diaconis_histogram(const Eigen::VectorXd& data, std::size_t max_bins) {
  Histogram h;
  if (data.size() == 0) return h;
  std::vector<double> s(data.data(), data.data() + data.size());
  std::sort(s.begin(), s.end());
  double lo = s.front();
  double hi = s.back();
  const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  std::size_t bins = 1;
  if (hi > lo && iqr > 0.0) {
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(s.size()));
    bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
    bins = std::clamp<std::size_t>(bins, 1, max_bins);
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double v : s) {
    auto b = static_cast<std::size_t>(std::floor((v - lo) / width));
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

const ChannelSummary& ExperimentSummary::channel(const std::string& name) const {
  for (const auto& c : channels) {
    if (c.name == name) return c;
  }
  throw ValidationError("summary has no channel '" + name + "'");
}

double yule_walker_ar1(const AcfSequence& acf) {
  if (acf.values.size() < 2) throw ValidationError("yule_walker_ar1: ACF lacks lag 1");
  if (acf.normalization != AcfNormalization::correlation) {
    throw ValidationError("yule_walker_ar1: needs autocorrelations, not autocovariances");
  }
  return acf[1];
}

std::map<std::string, double> channel_truths(const ExperimentConfig& config) {
  const auto lags = config.required_lags();
  const std::size_t max_lag = lags.empty() ? 1 : std::max<std::size_t>(lags.back(), 1);
  const AcvFunction acv = theoretical_acv(config.process, max_lag);
  std::map<std::string, double> out;
  for (const auto& name : config.channels()) {
    if (name == "qn" || name == "sd") {
      out[name] = std::sqrt(acv.gamma(0));
    } else if (name == "phi_robust" || name == "phi_classical") {
      out[name] = acv.gamma(1) / acv.gamma(0);
    } else {
      const auto open = name.find('[');
      const auto h = static_cast<long>(std::stoul(name.substr(open + 1)));
      out[name] = acv.at(h);
    }
  }
  for (const auto& [k, v] : config.truth) out[k] = v;
  return out;
}

ReplicationRecord run_replication(const ExperimentConfig& config, std::size_t r) {
  ReplicationRecord rec;
  rec.index = r;
  rec.process_seed = derive_seed(config.master_seed, r, StreamPurpose::process);
  rec.outlier_seed = derive_seed(config.master_seed, r, StreamPurpose::outliers);
  const std::string ctx = "replication " + std::to_string(r) + ": ";
  try {
    TimeSeries x = generate(config.process, config.n, rec.process_seed);
    if (config.outliers.active()) {
      ContaminatedSeries c = contaminate(x, config.outliers, rec.outlier_seed);
      rec.outlier_count = c.events.size();
      x = std::move(c.series);
    }
    std::map<std::size_t, double> robust;
    std::map<std::size_t, double> classical;
    const auto robust_at = [&](std::size_t h) {
      auto it = robust.find(h);
      if (it == robust.end()) it = robust.emplace(h, robust_autocov(x, h).value).first;
      return it->second;
    };
    const auto classical_at = [&](std::size_t h) {
      auto it = classical.find(h);
      if (it == classical.end()) it = classical.emplace(h, classical_autocov(x, h).value).first;
      return it->second;
    };
    const auto ratio_acf = [](double g0, double g1, AcvEstimator e) {
      if (g0 == 0.0) throw DegenerateSampleError("zero lag-0 autocovariance");
      AcfSequence acf;
      acf.values = Eigen::Vector2d(1.0, g1 / g0);
      acf.normalization = AcfNormalization::correlation;
      acf.estimator = e;
      return acf;
    };
    for (const auto& name : config.channels()) {
      double v = 0.0;
      if (name == "qn") {
        v = qn_scale(x).value;
      } else if (name == "sd") {
        v = sample_std(x).value;
      } else if (name == "phi_robust") {
        v = yule_walker_ar1(ratio_acf(robust_at(0), robust_at(1), AcvEstimator::robust_q));
      } else if (name == "phi_classical") {
        v = yule_walker_ar1(ratio_acf(classical_at(0), classical_at(1), AcvEstimator::classical));
      } else {
        const std::size_t h = std::stoul(name.substr(name.find('[') + 1));
        v = name.rfind("acv_robust", 0) == 0 ? robust_at(h) : classical_at(h);
      }
      if (!std::isfinite(v)) throw NumericError(name + " is not finite");
      rec.values.push_back(v);
    }
  } catch (const ValidationError& e) {
    throw ValidationError(ctx + e.what());
  } catch (const std::exception& e) {
    throw NumericError(ctx + e.what());
  }
  return rec;
}

ExperimentSummary run_experiment(const ExperimentConfig& config, std::size_t replications) {
  config.validate();
  const std::size_t R = replications > 0 ? replications : config.replications;
  const auto start = std::chrono::steady_clock::now();

  std::vector<ReplicationRecord> records(R);
  std::size_t threads = config.threads > 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, R);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::size_t failed_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;
  const auto work = [&] {
    while (!failed.load()) {
      const std::size_t r = next.fetch_add(1);
      if (r >= R) return;
      try {
        records[r] = run_replication(config, r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (r < failed_index) {
          failed_index = r;
          failure = std::current_exception();
        }
        failed = true;
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentSummary summary;
  summary.config = config;
  summary.replications = R;
  summary.threads_used = threads;
  for (const auto& rec : records) summary.total_outliers += rec.outlier_count;

  const auto names = config.channels();
  const auto truths = channel_truths(config);
  const double scale = config.normalization.factor(config.n);
  for (std::size_t c = 0; c < names.size(); ++c) {
    ChannelSummary ch;
    ch.name = names[c];
    ch.truth = truths.at(ch.name);
    ch.values.resize(static_cast<Eigen::Index>(R));
    for (std::size_t r = 0; r < R; ++r) ch.values(static_cast<Eigen::Index>(r)) = records[r].values[c];
    ch.mean = mean_of(ch.values);
    ch.bias = ch.mean - ch.truth;
    CompensatedSum sq;
    for (Eigen::Index i = 0; i < ch.values.size(); ++i) {
      const double e = ch.values(i) - ch.truth;
      sq.add(e * e);
    }
    ch.mse = sq.value() / static_cast<double>(R);
    ch.rmse = std::sqrt(ch.mse);
    ch.normalized_errors = scale * (ch.values.array() - ch.truth).matrix();
    ch.normalized_mean = mean_of(ch.normalized_errors);
    if (R > 1) {
      ch.sd = std::sqrt(variance_of(ch.values));
      ch.normalized_sd = std::sqrt(variance_of(ch.normalized_errors));
    }
    ch.histogram = freedman_diaconis_histogram(ch.normalized_errors);
    summary.channels.push_back(std::move(ch));
  }
  if (config.are_max_lag > 0 && R > 1) summary.are = empirical_are(summary, config.are_max_lag);
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

std::vector<AreEstimate> empirical_are(const ExperimentSummary& summary, std::size_t max_lag) {
  if (summary.replications < 2) throw ValidationError("empirical_are: needs at least 2 replications");
  std::optional<AcvFunction> acv;
  if (!summary.config.outliers.active()) {
    AcvFunction a = theoretical_acv(summary.config.process, 20000);
    if (a.regime == MemoryRegime::short_memory) acv = std::move(a);
  }
  std::vector<AreEstimate> out;
  const double R = static_cast<double>(summary.replications);
  for (std::size_t h = 1; h <= max_lag; ++h) {
    const auto& c = summary.channel(acv_name("acv_classical", h)).values;
    const auto& r = summary.channel(acv_name("acv_robust", h)).values;
    // The 1/n classical estimate shrinks by (n - h)/n; put it on the n - h pairs the robust one uses.
    const double shrink = static_cast<double>(summary.config.n - h) / static_cast<double>(summary.config.n);
    const double vc_raw = variance_of(c);
    const double vr = variance_of(r);
    if (!(vr > 0.0)) throw NumericError("empirical_are: zero robust variance at lag " + std::to_string(h));
    const Eigen::VectorXd u = (c.array() - mean_of(c)).square().matrix();
    const Eigen::VectorXd w = (r.array() - mean_of(r)).square().matrix();
    const double mu = mean_of(u);
    const double mw = mean_of(w);
    CompensatedSum cov;
    for (Eigen::Index i = 0; i < u.size(); ++i) cov.add((u(i) - mu) * (w(i) - mw));
    const double cuw = cov.value() / (R - 1.0);
    const double var_log =
        (variance_of(u) / (vc_raw * vc_raw) + variance_of(w) / (vr * vr) - 2.0 * cuw / (vc_raw * vr)) / R;
    AreEstimate e;
    e.lag = h;
    e.value = vc_raw / (shrink * shrink) / vr;
    e.standard_error = e.value * std::sqrt(std::max(var_log, 0.0));
    if (acv) e.analytic = are_autocov(*acv, h);
    out.push_back(e);
  }
  return out;
}

std::string CheckResult::line() const {
  std::string s = pass ? "PASS " : "FAIL ";
  s += check.channel + " " + check.statistic + " = " + fmt6(observed);
  if (check.mode == "abs" || check.mode == "rel") {
    s += " (target " + fmt6(check.target) + " +- " + fmt6(tolerance_used) + ")";
  } else if (check.mode == "le") {
    s += " (target <= " + fmt6(check.target) + ")";
  } else if (check.mode == "ge") {
    s += " (target >= " + fmt6(check.target) + ")";
  } else {
    s += " (target in [" + fmt6(check.lower) + ", " + fmt6(check.upper) + "])";
  }
  if (!check.note.empty()) s += " [" + check.note + "]";
  return s;
}

std::vector<CheckResult> evaluate_checks(const ExperimentSummary& summary, double tolerance_divisor) {
  std::vector<CheckResult> out;
  for (const auto& c : summary.config.checks) {
    CheckResult res;
    res.check = c;
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    if (c.channel == "are") {
      if (summary.are.empty()) throw ValidationError("checks: no ARE table in this summary");
      double lo = summary.are.front().value;
      double hi = lo;
      CompensatedSum s;
      for (const auto& a : summary.are) {
        lo = std::min(lo, a.value);
        hi = std::max(hi, a.value);
        s.add(a.value);
      }
      res.observed = c.statistic == "min"   ? lo
                     : c.statistic == "max" ? hi
                     : c.statistic == "mean" ? s.value() / static_cast<double>(summary.are.size())
                                             : nan;
    } else {
      const auto& ch = summary.channel(c.channel);
      if (c.statistic == "mean") res.observed = ch.mean;
      else if (c.statistic == "bias") res.observed = ch.bias;
      else if (c.statistic == "sd") res.observed = ch.sd.value_or(nan);
      else if (c.statistic == "rmse") res.observed = ch.rmse;
      else if (c.statistic == "mse") res.observed = ch.mse;
      else if (c.statistic == "norm_mean") res.observed = ch.normalized_mean;
      else if (c.statistic == "norm_sd") res.observed = ch.normalized_sd.value_or(nan);
      else if (c.statistic == "min") res.observed = ch.values.minCoeff();
      else res.observed = ch.values.maxCoeff();
    }
    res.tolerance_used = c.tolerance / tolerance_divisor;
    const double o = res.observed;
    if (c.mode == "abs") res.pass = std::abs(o - c.target) <= res.tolerance_used;
    else if (c.mode == "rel") {
      res.tolerance_used *= std::abs(c.target);
      res.pass = std::abs(o - c.target) <= res.tolerance_used;
    } else if (c.mode == "le") res.pass = o <= c.target;
    else if (c.mode == "ge") res.pass = o >= c.target;
    else res.pass = o >= c.lower && o <= c.upper;
    out.push_back(res);
  }
  return out;
}

}  // namespace qnacf
