#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "scalefit/analysis.hpp"
#include "scalefit/catalog.hpp"
#include "scalefit/error.hpp"
#include "scalefit/synth.hpp"

using namespace scalefit;

namespace {

// C^-0.2 against (2C)^-0.1 once D is mapped through C = 36 D^2.
struct AnalyticCase {
  ScalingLaw data = ScalingLaw::make(0.0, 1.0 / std::sqrt(72.0), 0.2, Variable::DatasetSize);
  ScalingLaw compute = ScalingLaw::make(0.0, 1.0, 0.2, Variable::Compute);
  PurePowerLaw nopt{1.0, 0.5};
  ConsistencyOptions opts = [] {
    ConsistencyOptions o;
    o.flops_per_pf_day = 1.0;
    return o;
  }();
};

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Domain;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("forecast on the 16x16 per-image compute law") {
  const auto law = ScalingLaw::make(2026, 1.7e10, 0.16, Variable::Compute, LossUnit::NatsPerExample, 768);
  CHECK(forecast_x_for_reducible(law, 1.0) == doctest::Approx(1.7e10).epsilon(1e-14));
  CHECK(forecast_x_for_reducible(law, 10.0) == doctest::Approx(1.7e10 * std::pow(10.0, -6.25)).epsilon(1e-12));
  CHECK(forecast_x_for_reducible(law, 10.0) == doctest::Approx(9.6e3).epsilon(0.01));
  CHECK(kind_of([&] { forecast_x_for_reducible(law, 0.0); }) == ErrorKind::Domain);
  CHECK(kind_of([&] { forecast_x_for_reducible(law, -1.0); }) == ErrorKind::Domain);
}

TEST_CASE("forecast inverts the reducible term") {
  for (const double l_inf : {0.0, 1.0, 2000.0})
    for (const double x0 : {1e-8, 1.0, 1e10})
      for (const double a : {0.05, 0.2, 0.7}) {
        const auto law = ScalingLaw::make(l_inf, x0, a);
        for (const double x : log_spaced(1e-6, 1e12, 37)) {
          const double back = forecast_x_for_reducible(law, reducible_at(law, x));
          CHECK(std::abs(back - x) <= 1e-9 * x);
        }
      }
}

TEST_CASE("decompose") {
  const auto whole = ScalingLaw::make(0.0, 3.0, 0.3, Variable::DatasetSize);
  const auto d0 = decompose(whole);
  CHECK(d0.entropy_estimate == 0.0);
  CHECK(d0.kl_law == whole);
  CHECK(d0.caveats.empty());

  const auto law = ScalingLaw::make(3.13, 1e10, 0.2, Variable::Compute);
  const auto d = decompose(FitReport::from_law(law));
  CHECK(d.entropy_estimate == 3.13);
  CHECK(d.kl_law.irreducible == 0.0);
  CHECK(d.kl_law.scale == law.scale);
  CHECK(d.kl_law.exponent == law.exponent);
  for (const double x : {1e-3, 1.0, 1e5})
    CHECK(eval_law(law, x) == doctest::Approx(d.entropy_estimate + eval_law(d.kl_law, x)).epsilon(1e-15));

  const auto dn = decompose(ScalingLaw::make(2.0, 1e9, 0.1, Variable::ModelSize));
  REQUIRE(dn.caveats.size() == 1);
  CHECK(dn.caveats[0] == std::string(kModelSizeCaveat));

  CHECK(kind_of([] { decompose(FitReport::from_power(PurePowerLaw{1e9, 0.7})); }) == ErrorKind::NotDecomposable);
  auto bad = FitReport::from_law(law);
  bad.converged = false;
  CHECK(kind_of([&] { decompose(bad); }) == ErrorKind::Domain);
}

TEST_CASE("consistency: analytic intersection at C = 2") {
  const AnalyticCase k;
  const auto r = consistency_check(k.data, k.nopt, k.compute, 0.05, k.opts);
  REQUIRE(r.point.found);
  CHECK(std::abs(r.point.compute - 2.0) < 1e-6);
  CHECK(r.point.tokens == doctest::Approx(std::sqrt(2.0 / 36.0)).epsilon(1e-8));
  CHECK(r.point.residual <= 1e-6);
  REQUIRE(r.low.found);
  REQUIRE(r.high.found);
  CHECK(r.monotone);
  CHECK(r.bracketing);
  CHECK(r.low.residual <= 1e-6);
  CHECK(r.high.residual <= 1e-6);
  CHECK(r.band_low < r.band_high);
}

TEST_CASE("consistency: intersection compute is monotone in beta") {
  const AnalyticCase k;
  std::vector<double> cs;
  for (const double beta : {0.40, 0.45, 0.5, 0.55, 0.6}) {
    PurePowerLaw nopt = k.nopt;
    nopt.exponent = beta;
    const auto r = consistency_check(k.data, nopt, k.compute, 0.0, k.opts);
    REQUIRE(r.point.found);
    CHECK(r.point.residual <= 1e-6);
    cs.push_back(r.point.compute);
  }
  const bool up = cs[1] > cs[0];
  for (std::size_t i = 1; i < cs.size(); ++i) CHECK((cs[i] > cs[i - 1]) == up);
  CHECK(cs[1] != cs[0]);
}

TEST_CASE("consistency: perturb = 0 collapses the band") {
  const AnalyticCase k;
  const auto r = consistency_check(k.data, k.nopt, k.compute, 0.0, k.opts);
  REQUIRE(r.point.found);
  CHECK(r.band_low == r.point.compute);
  CHECK(r.band_high == r.point.compute);
  CHECK(r.monotone);
}

TEST_CASE("consistency: no sign change is reported, not thrown") {
  // Through C = 36 D^2, (D / (1/6))^-0.4 is exactly C^-0.2: the two
  // reducible curves coincide everywhere.
  const AnalyticCase k;
  const auto same = ScalingLaw::make(0.0, 1.0 / 6.0, 0.4, Variable::DatasetSize);
  for (const double c : {1e-6, 1.0, 1e6})
    CHECK(reducible_at(same, std::sqrt(c / 36.0)) == doctest::Approx(reducible_at(k.compute, c)).epsilon(1e-14));
  const auto r = consistency_check(same, k.nopt, k.compute, 0.0, k.opts);
  CHECK_FALSE(r.point.found);

  // Parallel reducible curves never meet either.
  const auto shifted = ScalingLaw::make(0.0, 2.0 / 6.0, 0.4, Variable::DatasetSize);
  CHECK_FALSE(consistency_check(shifted, k.nopt, k.compute, 0.0, k.opts).point.found);
}

TEST_CASE("consistency: input errors") {
  const AnalyticCase k;
  CHECK(kind_of([&] { consistency_check(k.compute, k.nopt, k.compute, 0.05, k.opts); }) == ErrorKind::Domain);
  CHECK(kind_of([&] { consistency_check(k.data, k.nopt, k.data, 0.05, k.opts); }) == ErrorKind::Domain);
  CHECK(kind_of([&] { consistency_check(k.data, PurePowerLaw{1, 1.0}, k.compute, 0.05, k.opts); }) == ErrorKind::Domain);
  CHECK(kind_of([&] { consistency_check(k.data, k.nopt, k.compute, -0.1, k.opts); }) == ErrorKind::Domain);
}

TEST_CASE("nearest-rank percentile") {
  CHECK(kDefaultPercentiles == std::vector<double>{1, 5, 20, 50, 80, 95, 99});
  const std::vector<double> odd{9, 1, 7, 3, 5};
  CHECK(nearest_rank_percentile(odd, 50) == 5);
  CHECK(nearest_rank_percentile(odd, 1) == 1);
  CHECK(nearest_rank_percentile(odd, 100) == 9);
  CHECK(nearest_rank_percentile({1, 2, 3, 4}, 50) == 2);
  CHECK(nearest_rank_percentile({1, 2, 3, 4}, 51) == 3);
  CHECK(kind_of([] { nearest_rank_percentile({}, 50); }) == ErrorKind::InsufficientData);
  CHECK(kind_of([] { nearest_rank_percentile({1.0}, 0); }) == ErrorKind::Domain);
}

TEST_CASE("percentile trends of identical examples agree") {
  const auto law = ScalingLaw::make(2.0, 1e4, 0.2, Variable::ModelSize);
  LossMatrix m;
  for (const double n : log_spaced(1e5, 1e9, 8)) {
    m.n_params.push_back(n);
    m.losses.emplace_back(120, eval_law(law, n));
  }
  const auto trends = percentile_trends(m, kDefaultPercentiles);
  REQUIRE(trends.size() == 7);
  const auto ref = trends.front().fit.parameters();
  for (const auto& t : trends) {
    REQUIRE(t.fit.converged);
    const auto p = t.fit.parameters();
    for (std::size_t i = 0; i < 3; ++i) CHECK(p[i] == doctest::Approx(ref[i]).epsilon(1e-6));
  }
  CHECK(ref[2] == doctest::Approx(0.2).epsilon(1e-6 / 0.2));
}

TEST_CASE("percentile trends recover the shared exponent") {
  SynthFamily base;
  base.n_scale = 1e4;
  base.alpha_n = 0.2;
  const auto m = gen_example_matrix(base, 400, {1.0, 3.0}, log_spaced(1e5, 1e10, 10));
  for (const auto& t : percentile_trends(m, kDefaultPercentiles)) {
    CAPTURE(t.percentile);
    CHECK(t.fit.law().exponent == doctest::Approx(0.2).epsilon(0.02 / 0.2));
  }
}

TEST_CASE("percentile trends: input errors") {
  LossMatrix m{{1e5, 1e6, 1e7}, {std::vector<double>(100, 1.0), std::vector<double>(100, 1.0), std::vector<double>(100, 1.0)}};
  CHECK(kind_of([&] { percentile_trends(m, kDefaultPercentiles); }) == ErrorKind::InsufficientData);
  m.n_params.push_back(1e8);
  m.losses.emplace_back(99, 1.0);
  CHECK(kind_of([&] { percentile_trends(m, kDefaultPercentiles); }) == ErrorKind::Domain);
  for (auto& row : m.losses) row.assign(99, 1.0);
  CHECK(kind_of([&] { percentile_trends(m, kDefaultPercentiles); }) == ErrorKind::InsufficientData);
  for (auto& row : m.losses) row.assign(100, 1.0);
  const std::vector<double> bad{0.0};
  CHECK(kind_of([&] { percentile_trends(m, bad); }) == ErrorKind::Domain);
}

TEST_CASE("scan optimum") {
  std::vector<DataPoint> quad;
  for (const double r : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0})
    quad.push_back({r, std::pow(std::log(r) - std::log(5.0), 2) + 2.0});
  const auto q = scan_optimum(quad);
  CHECK(q.status == ScanStatus::Interior);
  CHECK(q.ratio == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(q.loss == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(q.curvature == doctest::Approx(2.0).epsilon(1e-9));

  const std::vector<DataPoint> down{{1, 5}, {2, 4}, {4, 3.5}, {8, 3.2}, {16, 3.1}};
  const auto d = scan_optimum(down);
  CHECK(d.status != ScanStatus::Interior);
  CHECK(d.ratio == 16.0);

  const std::vector<DataPoint> v{{1, 2}, {10, 1}, {100, 2}};
  const auto m = scan_optimum(v);
  CHECK(m.status == ScanStatus::Interior);
  CHECK(m.ratio == doctest::Approx(10.0).epsilon(1e-12));

  CHECK(kind_of([] { scan_optimum(std::vector<DataPoint>{{1, 1}, {2, 2}}); }) == ErrorKind::InsufficientData);
}

TEST_CASE("transfer gap") {
  const auto unknown = transfer_gap(ScalingLaw::make(5.0, 1e9, 0.3), std::nullopt);
  CHECK(unknown.entropy_unknown);
  CHECK_FALSE(unknown.kl_estimate.has_value());
  CHECK(unknown.asymptotic_loss == 5.0);

  const auto g = transfer_gap(ScalingLaw::make(5.0, 1e9, 0.3), 4.2);
  CHECK_FALSE(g.entropy_unknown);
  CHECK(*g.kl_estimate == doctest::Approx(0.8).epsilon(1e-14));
  CHECK_FALSE(g.negative_kl);

  const auto n = transfer_gap(ScalingLaw::make(4.0, 1e9, 0.3), 4.5);
  CHECK(*n.kl_estimate == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(n.negative_kl);
}

}  // TEST_SUITE
