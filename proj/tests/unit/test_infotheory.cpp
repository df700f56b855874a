#include <cmath>
#include <limits>

#include "doctest.h"
#include "scalefit/error.hpp"
#include "scalefit/infotheory.hpp"
#include "scalefit/synth.hpp"

using namespace scalefit;

namespace {

// Oracle: direct sum of t^-p - (t+T)^-p in extended precision.
double brute_context_mi(const ContextModel& m) {
  long double sum = 0.0L, comp = 0.0L;
  for (std::int64_t t = 1; t <= m.horizon; ++t) {
    const long double term = std::pow(static_cast<long double>(t), -static_cast<long double>(m.p)) -
                             std::pow(static_cast<long double>(t + m.horizon), -static_cast<long double>(m.p));
    const long double y = term - comp;
    const long double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
  }
  return static_cast<double>(sum * (static_cast<long double>(m.l_unigram) - m.l_model));
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_SUITE("infotheory") {

TEST_CASE("mutual information from paired losses") {
  CHECK(mutual_info(10.0, 2.0).mi == 8.0);
  CHECK_FALSE(mutual_info(10.0, 2.0).negative);
  CHECK(mutual_info(5.0, 5.0).mi == 0.0);
  const auto neg = mutual_info(4.0, 4.5);
  CHECK(neg.mi == -0.5);
  CHECK(neg.negative);
  CHECK(neg.source == MISource::PairedLoss);
  for (const double a : {0.0, 1.5, 7.25, 1e3})
    for (const double b : {0.0, 0.5, 3.0})
      CHECK(mutual_info(a, b).mi + b == a);
  CHECK_THROWS_AS(mutual_info(std::nan(""), 1.0), Error);
  CHECK_THROWS_AS(mutual_info(1.0, std::numeric_limits<double>::infinity()), Error);
  CHECK_THROWS_AS(mutual_info(-1.0, 1.0), Error);
}

TEST_CASE("infogain") {
  CHECK(*infogain(8.0, 80.0).infogain == doctest::Approx(0.10).epsilon(1e-15));
  CHECK(*infogain(0.0, 80.0).infogain == 0.0);
  const auto over = infogain(5.0, 4.0);
  CHECK(*over.infogain == 1.25);
  CHECK(over.over_unity);
  CHECK_FALSE(infogain(4.0, 4.0).over_unity);
  CHECK_THROWS_AS(infogain(1.0, 0.0), Error);
  CHECK_THROWS_AS(infogain(1.0, -2.0), Error);
}

TEST_CASE("words equivalent") {
  CHECK(words_equivalent(8.0, 3.4) == doctest::Approx(2.35).epsilon(0.001));
  CHECK(words_equivalent(8.0, 2.6) == doctest::Approx(3.08).epsilon(0.001));
  CHECK(words_equivalent(0.0, 3.4) == 0.0);
  CHECK_THROWS_AS(words_equivalent(8.0, 0.0), Error);
  CHECK_THROWS_AS(words_equivalent(8.0, -1.0), Error);
}

TEST_CASE("log-MI fit") {
  std::vector<DataPoint> exact;
  for (const double n : log_spaced(1e4, 1e10, 10)) exact.push_back({n, 0.5 * std::log(n / 1e3)});
  const auto f = fit_log_mi(exact);
  CHECK(f.lambda == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.n_c == doctest::Approx(1e3).epsilon(1e-9));
  CHECK(f.increasing);

  const std::vector<DataPoint> two{{1e9, 0.1}, {3e12, 0.2}};
  const auto t = fit_log_mi(two);
  CHECK(t.lambda == doctest::Approx(0.01249).epsilon(1e-3));
  CHECK(t.n_c == doctest::Approx(3.33e5).epsilon(1e-3));
  CHECK(invert_log_mi(t, 0.2) == doctest::Approx(3.0e12).epsilon(1e-9));
  CHECK(invert_log_mi(t, 0.0) == doctest::Approx(t.n_c).epsilon(1e-15));

  for (const double lambda : {0.01, 0.3, 2.0})
    for (const double nc : {1e2, 3.3e5, 1e8}) {
      std::vector<DataPoint> pts;
      for (const double n : log_spaced(1e3, 1e12, 10)) pts.push_back({n, lambda * std::log(n / nc)});
      const auto r = fit_log_mi(pts);
      CHECK(rel(r.lambda, lambda) < 1e-9);
      CHECK(rel(r.n_c, nc) < 1e-9);
      for (const double n : {1e4, 1e9, 1e13}) CHECK(rel(invert_log_mi(r, r(n)), n) < 1e-9);
    }
}

TEST_CASE("log-MI fit: flat or falling trends are flagged, not inverted") {
  const std::vector<DataPoint> down{{1e6, 0.3}, {1e8, 0.2}, {1e10, 0.1}};
  const auto f = fit_log_mi(down);
  CHECK_FALSE(f.increasing);
  CHECK(f.lambda < 0.0);
  CHECK_THROWS_AS(invert_log_mi(f, 0.5), Error);
  CHECK_THROWS_AS(fit_log_mi(std::vector<DataPoint>{{1e6, 0.3}}), Error);
  CHECK_THROWS_AS(fit_log_mi(std::vector<DataPoint>{{1e6, 0.3}, {1e6, 0.4}}), Error);
}

TEST_CASE("generalized harmonic numbers") {
  for (const double p : {0.0, 0.1, 0.5, 1.0, 2.5}) CHECK(gen_harmonic(1, p) == 1.0);
  CHECK(gen_harmonic(3, 1.0) == doctest::Approx(11.0 / 6.0).epsilon(1e-15));
  CHECK(gen_harmonic(4, 0.0) == 4.0);
  CHECK(gen_harmonic(10000, 2.0) == doctest::Approx(M_PI * M_PI / 6.0 - 1.0 / 10000 + 0.5e-8).epsilon(1e-12));
  CHECK_THROWS_AS(gen_harmonic(0, 1.0), Error);
}

TEST_CASE("harmonic bound 0 < 2 H_T - H_2T < H_T") {
  for (const std::int64_t T : {1, 2, 10, 100, 1000, 10000})
    for (const double p : {0.05, 0.1, 0.5, 0.9, 1.0}) {
      const double ht = gen_harmonic(T, p), h2t = gen_harmonic(2 * T, p);
      CHECK(2 * ht - h2t > 0.0);
      CHECK(2 * ht - h2t < ht);
    }
}

TEST_CASE("context loss") {
  const ContextModel m{4.0, 10.0, 0.5, 100};
  CHECK(context_loss(1.0, m) == 10.0);
  CHECK(context_loss(4.0, m) == 7.0);
  CHECK(context_loss(1e30, m) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK_THROWS_AS(context_loss(0.5, m), Error);
}

TEST_CASE("context MI and infogain examples") {
  const ContextModel one{4.0, 10.0, 0.5, 1};
  CHECK(context_mi(one) == doctest::Approx((1.0 - std::pow(2.0, -0.5)) * 6.0).epsilon(1e-15));
  CHECK(context_mi(one) == doctest::Approx(1.757).epsilon(1e-3));
  CHECK(context_infogain(one) == doctest::Approx(1.757359 / (4.0 + std::pow(2.0, -0.5) * 6.0)).epsilon(1e-6));
  CHECK(context_infogain(one) == doctest::Approx(0.213).epsilon(2e-3));

  const ContextModel flat{5.0, 5.0, 0.5, 100};
  CHECK(context_mi(flat) == 0.0);
  CHECK(context_infogain(flat) == 0.0);
}

TEST_CASE("context MI closed form equals the brute-force sum") {
  for (const std::int64_t T : {1, 2, 10, 100, 1000})
    for (const double p : {0.1, 0.5, 0.9, 1.0}) {
      CAPTURE(T);
      CAPTURE(p);
      const ContextModel m{2.5, 9.0, p, T};
      CHECK(rel(context_mi(m), brute_context_mi(m)) <= 1e-12);
    }
}

TEST_CASE("context infogain limit as the model loss vanishes") {
  for (const std::int64_t T : {1, 2, 10, 100, 1000})
    for (const double p : {0.1, 0.5, 0.9, 1.0}) {
      CAPTURE(T);
      CAPTURE(p);
      const double ht = gen_harmonic(T, p), h2t = gen_harmonic(2 * T, p);
      const double bound = (2 * ht - h2t) / (h2t - ht);
      CHECK(rel(context_infogain_limit(T, p), bound) <= 1e-12);
      const ContextModel m{1e-16, 1.0, p, T};
      CHECK(rel(context_infogain(m), bound) <= 1e-9);
    }
}

TEST_CASE("context infogain vanishes as the model loss reaches the unigram loss") {
  for (const double p : {0.1, 0.5, 1.0}) {
    const ContextModel m{5.0 - 1e-9, 5.0, p, 1000};
    CHECK(context_infogain(m) > 0.0);
    CHECK(context_infogain(m) < 1e-9);
  }
}

TEST_CASE("context model validation") {
  CHECK_THROWS_AS((ContextModel{0.0, 5.0, 0.5, 10}.validate()), Error);
  CHECK_THROWS_AS((ContextModel{6.0, 5.0, 0.5, 10}.validate()), Error);
  CHECK_THROWS_AS((ContextModel{4.0, 5.0, 0.0, 10}.validate()), Error);
  CHECK_THROWS_AS((ContextModel{4.0, 5.0, 1.5, 10}.validate()), Error);
  CHECK_THROWS_AS((ContextModel{4.0, 5.0, 0.5, 0}.validate()), Error);
}

TEST_CASE("context profile round trip") {
  const ContextModel truth{2.0, 8.0, 0.4, 1};
  std::vector<DataPoint> profile;
  for (const double t : log_spaced(1.0, 1024.0, 40)) profile.push_back({t, context_loss(t, truth)});
  const auto m = fit_context_profile(profile);
  CHECK(m.l_model == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(m.l_unigram == doctest::Approx(8.0).epsilon(1e-3));
  CHECK(m.p == doctest::Approx(0.4).epsilon(1e-3));
  CHECK(m.horizon == 1024);
  CHECK(m.l_unigram >= 8.0 - 1e-6);

  std::vector<DataPoint> flat;
  for (const double t : {1.0, 2.0, 4.0, 8.0, 16.0}) flat.push_back({t, 3.0});
  try {
    fit_context_profile(flat);
    FAIL("flat profile must be rejected");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateData);
  }
}

}  // TEST_SUITE
