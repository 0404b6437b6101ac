#include "doctest.h"

#include <cmath>

#include "qnacf/errors.hpp"
#include "qnacf/acf.hpp"
#include "qnacf/procgen.hpp"
#include "qnacf/qn.hpp"
#include "qnacf/rng.hpp"

using namespace qnacf;

TEST_CASE("seed streams") {
  CHECK(derive_seed(1, 0, StreamPurpose::process) == derive_seed(1, 0, StreamPurpose::process));
  CHECK(derive_seed(1, 0, StreamPurpose::process) != derive_seed(1, 0, StreamPurpose::outliers));
  CHECK(derive_seed(1, 0, StreamPurpose::process) != derive_seed(1, 1, StreamPurpose::process));
  CHECK(derive_seed(1, 0, StreamPurpose::process) != derive_seed(2, 0, StreamPurpose::process));
}

TEST_CASE("generators are deterministic in the seed") {
  CHECK(gen_ar1(100, 0.3, 5).values() == gen_ar1(100, 0.3, 5).values());
  CHECK(gen_ar1(100, 0.3, 5).values() != gen_ar1(100, 0.3, 6).values());
  CHECK(gen_arfima(300, 0.2, 4).values() == gen_arfima(300, 0.2, 4).values());
  CHECK(gen_skewed_ar1(50, 0.9, 0.4, 1).values() == gen_skewed_ar1(50, 0.9, 0.4, 1).values());
  CHECK_THROWS_AS(gen_ar1(10, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(gen_ar1(0, 0.1, 1), ValidationError);
  CHECK_THROWS_AS(gen_arfima(10, 0.5, 1), ValidationError);
}

TEST_CASE("AR(1) moments") {
  const TimeSeries x = gen_ar1(200000, 0.5, 12);
  CHECK(sample_std(x).value == doctest::Approx(1.1547005383792515).epsilon(0.01));
  CHECK(classical_acf(x, 1)[1] == doctest::Approx(0.5).epsilon(0.02));
  ProcessSpec s;
  s.kind = Ar1{0.2};
  const AcvFunction a = theoretical_acv(s, 3);
  CHECK(std::sqrt(a.gamma(0)) == doctest::Approx(1.0206207261596575).epsilon(1e-14));
  CHECK(a.gamma(2) == doctest::Approx(0.04 / 0.96).epsilon(1e-14));
  CHECK(a.regime == MemoryRegime::short_memory);
}

TEST_CASE("ARFIMA weights, variance and autocovariance") {
  const Eigen::VectorXd psi = arfima_ma_coefficients(0.2, 60);
  CHECK(psi(0) == 1.0);
  CHECK(psi(1) == doctest::Approx(0.2));
  CHECK(psi(2) == doctest::Approx(0.12));
  const double g50 = std::exp(std::lgamma(50.2) - std::lgamma(51.0) - std::lgamma(0.2));
  CHECK(psi(50) == doctest::Approx(g50).epsilon(1e-12));
  CHECK_THROWS_AS(arfima_ma_coefficients(0.0, 10), ValidationError);

  CHECK(arfima_variance(0.2) == doctest::Approx(1.0986855396043995).epsilon(1e-14));
  CHECK(arfima_variance(0.45) == doctest::Approx(3.642429629126853).epsilon(1e-13));
  CHECK(std::sqrt(arfima_variance(0.45)) == doctest::Approx(1.908515032460277).epsilon(1e-13));

  const std::size_t M = 200000;
  const double partial = arfima_ma_coefficients(0.3, M).squaredNorm();
  CHECK(partial < arfima_variance(0.3));
  CHECK(partial + arfima_tail_variance_bound(0.3, M) >= arfima_variance(0.3));

  ProcessSpec s;
  s.kind = Arfima{0.3};
  const AcvFunction a = theoretical_acv(s, 10);
  CHECK(a.regime == MemoryRegime::long_memory);
  CHECK(a.D == doctest::Approx(0.4));
  CHECK(a.gamma(1) / a.gamma(0) == doctest::Approx(0.3 / 0.7));
  s.kind = Arfima{-0.2};
  CHECK(theoretical_acv(s, 3).regime == MemoryRegime::short_memory);
}

TEST_CASE("ARFIMA truncation policy") {
  const std::size_t m = arfima_default_truncation(0.2, 500);
  CHECK(m >= 10000);
  CHECK(arfima_tail_variance_bound(0.2, m) < 1e-4 * arfima_variance(0.2));
  const TimeSeries x = gen_arfima(500, 0.2, 3);
  CHECK(x.metadata().at("method") == "truncated_ma");
  CHECK(x.metadata().count("warning") == 0);
  CHECK(arfima_default_truncation(0.45, 200) == std::size_t{1} << 22);
  ArfimaOptions short_ma;
  short_ma.truncation = 1000;
  const TimeSeries y = gen_arfima(200, 0.45, 3, short_ma);
  CHECK(y.metadata().at("truncation") == "1000");
  CHECK(y.metadata().count("warning") == 1);
}

TEST_CASE("exact generators") {
  ProcessSpec wn;
  const AcvFunction w = theoretical_acv(wn, 64);
  // With identity covariance the recursion passes the normals straight through.
  CHECK(gen_gaussian_durbin_levinson(w, 64, 8).values() == gen_white_noise(64, 8).values());

  ProcessSpec f;
  f.kind = Arfima{0.3};
  const AcvFunction a = theoretical_acv(f, 512);
  // pooled second moments over independent paths
  for (int method = 0; method < 2; ++method) {
    double s0 = 0.0;
    double s1 = 0.0;
    const int paths = 400;
    for (int r = 0; r < paths; ++r) {
      const TimeSeries x = method == 0 ? gen_gaussian_circulant(a, 256, 1000 + r)
                                       : gen_gaussian_durbin_levinson(a, 256, 1000 + r);
      const Eigen::VectorXd& v = x.values();
      s0 += v.squaredNorm() / 256.0;
      s1 += v.head(255).dot(v.tail(255)) / 255.0;
    }
    CHECK(s0 / paths == doctest::Approx(a.gamma(0)).epsilon(0.05));
    CHECK(s1 / paths == doctest::Approx(a.gamma(1)).epsilon(0.08));
  }

  ProcessSpec g;
  g.kind = Arfima{0.45};
  g.arfima_method = ArfimaMethod::circulant_embedding;
  const TimeSeries x = generate(g, 500, 77);
  CHECK(x.metadata().at("method") == "circulant_embedding");
  CHECK(x.size() == 500);
}

TEST_CASE("long-memory sample mean uses the exact variance of the mean") {
  ProcessSpec f;
  f.kind = Arfima{0.45};
  f.arfima_method = ArfimaMethod::circulant_embedding;
  const std::size_t n = 2000;
  const AcvFunction a = theoretical_acv(f, n);
  double var_mean = a.gamma(0) / static_cast<double>(n);
  for (std::size_t k = 1; k < n; ++k) {
    var_mean += 2.0 * (1.0 - static_cast<double>(k) / n) * a.gamma(static_cast<Eigen::Index>(k)) / n;
  }
  int inside = 0;
  for (int r = 0; r < 50; ++r) {
    if (std::abs(generate(f, n, 500 + r).mean()) <= 4.0 * std::sqrt(var_mean)) ++inside;
  }
  CHECK(inside >= 49);
}

TEST_CASE("skewed innovations preset") {
  const TimeSeries x = gen_skewed_ar1(200000, 0.9, 0.4, 6);
  CHECK(x.mean() == doctest::Approx(4.0).epsilon(0.03));
  CHECK(sample_std(x).value * sample_std(x).value == doctest::Approx(1.32 / 0.19).epsilon(0.05));
  ProcessSpec s;
  s.kind = SkewedAr1{};
  CHECK(theoretical_acv(s, 2).gamma(0) == doctest::Approx(1.32 / 0.19));
}

TEST_CASE("additive outliers") {
  const TimeSeries y = gen_ar1(100000, 0.5, 1);
  const ContaminatedSeries none = contaminate(y, {0.0, 10.0}, 4);
  CHECK(none.events.empty());
  CHECK(none.series.values() == y.values());

  const ContaminatedSeries c = contaminate(y, {0.1, 10.0}, 4);
  CHECK(static_cast<double>(c.events.size()) == doctest::Approx(10000).epsilon(0.04));
  std::size_t up = 0;
  for (const auto& e : c.events) {
    CHECK(c.series[e.index] == e.contaminated);
    CHECK(e.contaminated - e.original == doctest::Approx(10.0 * e.sign));
    up += e.sign > 0;
  }
  CHECK(static_cast<double>(up) / c.events.size() == doctest::Approx(0.5).epsilon(0.05));

  // event positions depend on (seed, n, p) only
  const ContaminatedSeries other = contaminate(gen_white_noise(100000, 2), {0.1, 3.0}, 4);
  REQUIRE(other.events.size() == c.events.size());
  for (std::size_t i = 0; i < c.events.size(); ++i) {
    CHECK(other.events[i].index == c.events[i].index);
    CHECK(other.events[i].sign == c.events[i].sign);
  }
  CHECK_THROWS_AS(contaminate(y, {1.5, 1.0}, 1), ValidationError);
}
