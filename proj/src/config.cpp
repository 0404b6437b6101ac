#include "qnacf/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qnacf/errors.hpp"

namespace qnacf {

namespace {

using nlohmann::json;

const std::set<std::string> kProcessKeys = {"process", "phi", "d", "epsilon", "innovation_sd",
                                            "arfima_method", "truncation"};

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_object(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  return j;
}

double get_number(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ValidationError("field '" + key + "': expected a number");
  return j.at(key).get<double>();
}

std::uint64_t get_unsigned(const json& j, const std::string& key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ValidationError("field '" + key + "': expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ValidationError("field '" + key + "': expected a string");
  return j.at(key).get<std::string>();
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ValidationError(where + "unknown field '" + it.key() + "'");
  }
}

ProcessSpec parse_process(const json& j) {
  ProcessSpec p;
  const std::string kind = get_string(j, "process", "white_noise");
  if (kind == "white_noise") {
    p.kind = WhiteNoise{};
  } else if (kind == "ar1") {
    p.kind = Ar1{get_number(j, "phi", 0.0)};
  } else if (kind == "arfima") {
    p.kind = Arfima{get_number(j, "d", 0.0)};
  } else if (kind == "ar1_skewed") {
    SkewedAr1 s;
    s.phi = get_number(j, "phi", s.phi);
    s.epsilon = get_number(j, "epsilon", s.epsilon);
    p.kind = s;
  } else {
    throw ValidationError("field 'process': expected white_noise, ar1, arfima or ar1_skewed, got '" + kind + "'");
  }
  p.innovation_sd = get_number(j, "innovation_sd", 1.0);
  const std::string method = get_string(j, "arfima_method", "truncated_ma");
  if (method == "truncated_ma") {
    p.arfima_method = ArfimaMethod::truncated_ma;
  } else if (method == "circulant_embedding") {
    p.arfima_method = ArfimaMethod::circulant_embedding;
  } else if (method == "durbin_levinson") {
    p.arfima_method = ArfimaMethod::durbin_levinson;
  } else {
    throw ValidationError("field 'arfima_method': unknown method '" + method + "'");
  }
  p.truncation = get_unsigned(j, "truncation", 0);
  try {
    p.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("field 'process': ") + e.what());
  }
  return p;
}

OutlierSpec parse_outliers(const json& j) {
  OutlierSpec o;
  o.probability = get_number(j, "outlier_probability", 0.0);
  o.magnitude = get_number(j, "outlier_magnitude", 0.0);
  if (!(o.probability >= 0.0 && o.probability <= 1.0)) {
    throw ValidationError("field 'outlier_probability': must lie in [0, 1]");
  }
  if (!(o.magnitude >= 0.0)) throw ValidationError("field 'outlier_magnitude': must be nonnegative");
  return o;
}

void put_process(json& j, const ProcessSpec& p) {
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, WhiteNoise>) {
          j["process"] = "white_noise";
        } else if constexpr (std::is_same_v<K, Ar1>) {
          j["process"] = "ar1";
          j["phi"] = k.phi;
        } else if constexpr (std::is_same_v<K, Arfima>) {
          j["process"] = "arfima";
          j["d"] = k.d;
        } else {
          j["process"] = "ar1_skewed";
          j["phi"] = k.phi;
          j["epsilon"] = k.epsilon;
        }
      },
      p.kind);
  j["innovation_sd"] = p.innovation_sd;
  if (std::holds_alternative<Arfima>(p.kind)) {
    j["arfima_method"] = p.arfima_method == ArfimaMethod::truncated_ma           ? "truncated_ma"
                         : p.arfima_method == ArfimaMethod::circulant_embedding ? "circulant_embedding"
                                                                                 : "durbin_levinson";
    j["truncation"] = p.truncation;
  }
}

Check parse_check(const json& c, std::size_t i) {
  const std::string where = "checks[" + std::to_string(i) + "]: ";
  if (!c.is_object()) throw ValidationError(where + "expected an object");
  reject_unknown(c, {"channel", "statistic", "mode", "target", "tolerance", "lower", "upper", "note"}, where);
  Check k;
  try {
    if (!c.contains("channel")) throw ValidationError("field 'channel' is required");
    if (!c.contains("statistic")) throw ValidationError("field 'statistic' is required");
    k.channel = get_string(c, "channel", "");
    k.statistic = get_string(c, "statistic", "");
    k.mode = get_string(c, "mode", "abs");
    k.target = get_number(c, "target", 0.0);
    k.tolerance = get_number(c, "tolerance", 0.0);
    k.lower = get_number(c, "lower", 0.0);
    k.upper = get_number(c, "upper", 0.0);
    k.note = get_string(c, "note", "");
  } catch (const ValidationError& e) {
    throw ValidationError(where + e.what());
  }
  return k;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  const json j = parse_object(json_text);
  std::set<std::string> allowed = kProcessKeys;
  allowed.insert({"name", "n", "replications", "full_scale_replications", "master_seed", "outlier_probability",
                  "outlier_magnitude", "estimators", "lags", "are_max_lag", "normalization", "exponent",
                  "targets", "target_note", "checks", "threads"});
  reject_unknown(j, allowed, "config: ");

  ExperimentConfig c;
  c.name = get_string(j, "name", c.name);
  c.process = parse_process(j);
  c.outliers = parse_outliers(j);
  c.n = get_unsigned(j, "n", c.n);
  c.replications = get_unsigned(j, "replications", c.replications);
  c.full_scale_replications = get_unsigned(j, "full_scale_replications", 5 * c.replications);
  c.master_seed = get_unsigned(j, "master_seed", c.master_seed);
  c.are_max_lag = get_unsigned(j, "are_max_lag", 0);
  c.threads = get_unsigned(j, "threads", 0);
  if (j.contains("estimators")) {
    if (!j.at("estimators").is_array()) throw ValidationError("field 'estimators': expected an array of strings");
    c.estimators.clear();
    for (const auto& e : j.at("estimators")) {
      if (!e.is_string()) throw ValidationError("field 'estimators': expected an array of strings");
      c.estimators.push_back(e.get<std::string>());
    }
  }
  if (j.contains("lags")) {
    if (!j.at("lags").is_array()) throw ValidationError("field 'lags': expected an array of integers");
    c.lags.clear();
    for (const auto& e : j.at("lags")) {
      if (!e.is_number_unsigned()) throw ValidationError("field 'lags': expected nonnegative integers");
      c.lags.push_back(e.get<std::size_t>());
    }
  }
  const std::string norm = get_string(j, "normalization", "sqrt_n");
  if (norm == "sqrt_n") {
    c.normalization.kind = Normalization::Kind::sqrt_n;
    c.normalization.exponent = 0.5;
    if (j.contains("exponent")) throw ValidationError("field 'exponent': only valid with normalization n_pow");
  } else if (norm == "n_pow") {
    c.normalization.kind = Normalization::Kind::n_pow;
    if (!j.contains("exponent")) throw ValidationError("field 'exponent': required with normalization n_pow");
    c.normalization.exponent = get_number(j, "exponent", 0.5);
  } else {
    throw ValidationError("field 'normalization': expected sqrt_n or n_pow, got '" + norm + "'");
  }
  if (j.contains("targets")) {
    if (!j.at("targets").is_object()) throw ValidationError("field 'targets': expected an object");
    for (auto it = j.at("targets").begin(); it != j.at("targets").end(); ++it) {
      if (!it.value().is_number()) throw ValidationError("field 'targets." + it.key() + "': expected a number");
      c.truth[it.key()] = it.value().get<double>();
    }
  }
  c.target_note = get_string(j, "target_note", "");
  if (j.contains("checks")) {
    if (!j.at("checks").is_array()) throw ValidationError("field 'checks': expected an array");
    std::size_t i = 0;
    for (const auto& e : j.at("checks")) c.checks.push_back(parse_check(e, i++));
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_text(path));
}

SimulationConfig parse_simulation_config(const std::string& json_text) {
  const json j = parse_object(json_text);
  std::set<std::string> allowed = kProcessKeys;
  allowed.insert({"n", "seed", "outlier_probability", "outlier_magnitude"});
  reject_unknown(j, allowed, "config: ");
  SimulationConfig s;
  s.process = parse_process(j);
  s.outliers = parse_outliers(j);
  s.n = get_unsigned(j, "n", s.n);
  s.seed = get_unsigned(j, "seed", s.seed);
  if (s.n < 1) throw ValidationError("field 'n': must be at least 1");
  return s;
}

SimulationConfig load_simulation_config(const std::string& path) {
  return parse_simulation_config(read_text(path));
}

std::string experiment_config_json(const ExperimentConfig& c, int indent) {
  json j;
  j["name"] = c.name;
  put_process(j, c.process);
  j["outlier_probability"] = c.outliers.probability;
  j["outlier_magnitude"] = c.outliers.magnitude;
  j["n"] = c.n;
  j["replications"] = c.replications;
  j["full_scale_replications"] = c.full_scale_replications;
  j["master_seed"] = c.master_seed;
  j["estimators"] = c.estimators;
  j["lags"] = c.lags;
  j["are_max_lag"] = c.are_max_lag;
  if (c.normalization.kind == Normalization::Kind::sqrt_n) {
    j["normalization"] = "sqrt_n";
  } else {
    j["normalization"] = "n_pow";
    j["exponent"] = c.normalization.exponent;
  }
  j["targets"] = json::object();
  for (const auto& [k, v] : c.truth) j["targets"][k] = v;
  j["target_note"] = c.target_note;
  j["checks"] = json::array();
  for (const auto& k : c.checks) {
    j["checks"].push_back({{"channel", k.channel},
                           {"statistic", k.statistic},
                           {"mode", k.mode},
                           {"target", k.target},
                           {"tolerance", k.tolerance},
                           {"lower", k.lower},
                           {"upper", k.upper},
                           {"note", k.note}});
  }
  j["threads"] = c.threads;
  return j.dump(indent);
}

std::string simulation_config_json(const SimulationConfig& s, int indent) {
  json j;
  put_process(j, s.process);
  j["outlier_probability"] = s.outliers.probability;
  j["outlier_magnitude"] = s.outliers.magnitude;
  j["n"] = s.n;
  j["seed"] = s.seed;
  return j.dump(indent);
}

}  // namespace qnacf
