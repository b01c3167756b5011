#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "cpc/biexp_fit.hpp"
#include "cpc/errors.hpp"

using namespace cpc;

namespace {

struct Model {
  double a1, tau1, a2, tau2;
  double operator()(double t) const {
    return a1 * std::exp(-t / tau1) + a2 * std::exp(-t / tau2);
  }
};

std::vector<double> time_axis(double t0, double t1, double step) {
  std::vector<double> t;
  for (double v = t0; v < t1 + 0.5 * step; v += step) t.push_back(v);
  return t;
}

std::vector<double> sample(const Model& m, const std::vector<double>& t, double noise = 0.0,
                           std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, noise > 0.0 ? noise : 1.0);
  std::vector<double> y;
  for (double v : t) y.push_back(m(v) + (noise > 0.0 ? z(rng) : 0.0));
  return y;
}

const Model kReference{-1.0, 3.1e-6, -2.5, 9.0e-6};

}  // namespace

TEST_CASE("noiseless bi-exponential data are recovered") {
  const auto t = time_axis(2.5e-6, 59.5e-6, 1e-6);
  const auto y = sample(kReference, t);
  const auto f = fit_biexponential(t, y);
  CHECK(f.converged);
  CHECK_FALSE(f.single_exponential);
  CHECK(f.a1 == doctest::Approx(kReference.a1).epsilon(1e-6));
  CHECK(f.a2 == doctest::Approx(kReference.a2).epsilon(1e-6));
  CHECK(f.tau1_s == doctest::Approx(kReference.tau1).epsilon(1e-6));
  CHECK(f.tau2_s == doctest::Approx(kReference.tau2).epsilon(1e-6));
  CHECK(f.warmup_time_s() == f.tau2_s);
  CHECK(f.points == t.size());
  CHECK(f.residuals.size() == t.size());
  CHECK(f.residual_norm < 1e-9);
  CHECK(f.evaluate(10e-6) == doctest::Approx(kReference(10e-6)).epsilon(1e-6));
}

TEST_CASE("time constants are reported in ascending order") {
  const Model swapped{-2.5, 9.0e-6, -1.0, 3.1e-6};
  const auto t = time_axis(2.5e-6, 59.5e-6, 1e-6);
  const auto f = fit_biexponential(t, sample(swapped, t));
  CHECK(f.tau1_s < f.tau2_s);
  CHECK(f.a1 == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("coincident time constants collapse to one exponential") {
  const Model same{-1.0, 6e-6, -2.0, 6e-6};
  const auto t = time_axis(2.5e-6, 59.5e-6, 1e-6);
  const auto f = fit_biexponential(t, sample(same, t));
  CHECK(f.single_exponential);
  CHECK(f.a1 == 0.0);
  CHECK(f.tau1_s == f.tau2_s);
  CHECK(f.a2 == doctest::Approx(-3.0).epsilon(0.01));
  CHECK(f.tau2_s == doctest::Approx(6e-6).epsilon(0.01));
}

TEST_CASE("nearly coincident time constants collapse to one exponential") {
  const auto t = time_axis(2.5e-6, 59.5e-6, 0.5e-6);
  for (double ratio : {1.001, 1.01, 1.03}) {
    const Model near{-0.5, 6e-6, -3.0, 6e-6 * ratio};
    const auto f = fit_biexponential(t, sample(near, t));
    CHECK(f.single_exponential);
    CHECK(f.converged);
    CHECK(f.a2 == doctest::Approx(-3.5).epsilon(1e-3));
    CHECK(f.tau2_s > 6e-6);
    CHECK(f.tau2_s < 6e-6 * ratio);
  }
}

TEST_CASE("a vanishing fast component collapses to one exponential") {
  const Model slow_only{0.0, 3e-6, -2.0, 9e-6};
  const auto t = time_axis(2.5e-6, 59.5e-6, 1e-6);
  const auto f = fit_biexponential(t, sample(slow_only, t));
  CHECK(f.single_exponential);
  CHECK(f.converged);
  CHECK(f.a2 == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(f.tau2_s == doctest::Approx(9e-6).epsilon(1e-6));
}

TEST_CASE("early points are excluded") {
  const auto t = time_axis(0.5e-6, 59.5e-6, 1e-6);
  auto y = sample(kReference, t);
  y[0] = y[1] = 1e3;  // corrupted, before the exclusion
  const auto f = fit_biexponential(t, y);
  CHECK(f.points == t.size() - 2);
  CHECK(f.tau2_s == doctest::Approx(kReference.tau2).epsilon(1e-6));
}

TEST_CASE("residuals of a good fit are white") {
  const auto t = time_axis(2.5e-6, 59.5e-6, 0.25e-6);
  const auto f = fit_biexponential(t, sample(kReference, t, 0.05, 3));
  const auto& r = f.residuals;
  double mean = 0.0, c0 = 0.0, c1 = 0.0;
  for (double v : r) mean += v;
  mean /= static_cast<double>(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    c0 += (r[i] - mean) * (r[i] - mean);
    if (i > 0) c1 += (r[i] - mean) * (r[i - 1] - mean);
  }
  const double n = static_cast<double>(r.size());
  CHECK(std::abs(mean) < 3 * 0.05 / std::sqrt(n));
  CHECK(std::abs(c1 / c0) < 3 / std::sqrt(n));
  CHECK(f.residual_norm == doctest::Approx(0.05 * std::sqrt(n - 4)).epsilon(0.15));
}

TEST_CASE("reported standard errors match the scatter over repeated fits") {
  const auto t = time_axis(2.5e-6, 59.5e-6, 1e-6);
  const int runs = 200;
  std::vector<double> tau2, depth;
  double se_tau2 = 0.0, se_depth = 0.0;
  for (int k = 0; k < runs; ++k) {
    const auto f = fit_biexponential(t, sample(kReference, t, 0.05, 1000 + k));
    REQUIRE(f.converged);
    tau2.push_back(f.tau2_s);
    const auto d = cooling_depth_from_fit(f);
    depth.push_back(d.delta_p_db);
    se_tau2 += f.se_tau2_s;
    se_depth += d.standard_error_db;
  }
  auto sd = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
  };
  CHECK(se_tau2 / runs == doctest::Approx(sd(tau2)).epsilon(0.3));
  CHECK(se_depth / runs == doctest::Approx(sd(depth)).epsilon(0.3));
}

TEST_CASE("cooling depth is the sum of the amplitudes") {
  const auto t = time_axis(2.5e-6, 59.5e-6, 1e-6);
  const auto f = fit_biexponential(t, sample(kReference, t));
  const auto d = cooling_depth_from_fit(f);
  CHECK(d.delta_p_db == doctest::Approx(-3.5).epsilon(1e-6));
  CHECK(d.standard_error_db >= 0.0);
}

TEST_CASE("flat data give a depth consistent with zero") {
  const auto t = time_axis(2.5e-6, 59.5e-6, 1e-6);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z(0.0, 0.05);
  std::vector<double> y;
  for (std::size_t i = 0; i < t.size(); ++i) y.push_back(z(rng));
  try {
    const auto f = fit_biexponential(t, y);
    if (f.converged) {
      const auto d = cooling_depth_from_fit(f);
      CHECK(std::abs(d.delta_p_db) <= 3 * d.standard_error_db + 0.05);
    }
  } catch (const DegenerateFitError&) {
    // An unconstrained time constant is a legitimate outcome for flat data.
  }
}

TEST_CASE("exactly zero data are degenerate") {
  const auto t = time_axis(2.5e-6, 59.5e-6, 1e-6);
  const std::vector<double> y(t.size(), 0.0);
  CHECK_THROWS_AS(fit_biexponential(t, y), DegenerateFitError);
}

TEST_CASE("an unconverged fit yields no depth") {
  BiExpFit f;
  f.converged = false;
  CHECK_THROWS_AS(cooling_depth_from_fit(f), NotConvergedError);

  const auto t = time_axis(2.5e-6, 59.5e-6, 1e-6);
  FitOptions opt;
  opt.max_iterations = 1;
  const auto g = fit_biexponential(t, sample(kReference, t, 0.05, 4), opt);
  CHECK_FALSE(g.converged);
  CHECK_THROWS_AS(cooling_depth_from_fit(g), NotConvergedError);
}

TEST_CASE("fit input checks") {
  const auto t = time_axis(2.5e-6, 8.5e-6, 1e-6);
  CHECK_THROWS_AS(fit_biexponential(t, sample(kReference, t)), std::domain_error);
  const auto t2 = time_axis(2.5e-6, 30.5e-6, 1e-6);
  auto y = sample(kReference, t2);
  y[5] = NAN;
  CHECK_THROWS_AS(fit_biexponential(t2, y), std::domain_error);
  CHECK_THROWS_AS(fit_biexponential(t2, std::vector<double>(3)), std::invalid_argument);
}

TEST_CASE("series input skips missing windows") {
  std::vector<DeltaPPoint> series;
  for (double t : time_axis(0.5e-6, 59.5e-6, 1e-6)) series.push_back({t, kReference(t)});
  series[10].delta_p_db.reset();
  const auto f = fit_biexponential(series);
  CHECK(f.points == series.size() - 3);
  CHECK(f.tau1_s == doctest::Approx(kReference.tau1).epsilon(1e-6));
}
