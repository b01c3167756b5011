#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "cpc/receiver.hpp"

using namespace cpc;

namespace {

ReceiverChain reference_chain() { return ReceiverChain{}; }

}  // namespace

TEST_CASE("LNA noise temperature with a matched source") {
  const LnaNoiseParameters p;
  CHECK(lna_input_noise_temperature(p, {0.0, 0.0}) == doctest::Approx(12.433165).epsilon(1e-7));
  CHECK(lna_input_noise_temperature(p, p.gamma_opt) == doctest::Approx(p.t_min_k));
}

TEST_CASE("LNA noise temperature is minimal at the optimum reflection") {
  const LnaNoiseParameters p;
  const double t_min = lna_input_noise_temperature(p, p.gamma_opt);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int tested = 0;
  while (tested < 10000) {
    const std::complex<double> g{u(rng), u(rng)};
    if (std::abs(g) >= 0.99) continue;
    CHECK(lna_input_noise_temperature(p, g) >= t_min - 1e-12);
    ++tested;
  }
}

TEST_CASE("LNA parameter validation") {
  LnaNoiseParameters p;
  p.gamma_opt = {1.0, 0.1};
  CHECK_THROWS_AS(lna_input_noise_temperature(p, {}), std::domain_error);
  CHECK_THROWS_AS(lna_input_noise_temperature(LnaNoiseParameters{}, {1.0, 0.0}), std::domain_error);
  p = {};
  p.noise_resistance_ohm = -1.0;
  CHECK_THROWS_AS(p.validate(), std::domain_error);
}

TEST_CASE("Friis cascade") {
  const std::vector<AmplifierStage> one{{35.0, 100.0}};
  CHECK(friis_cascade(one) == 35.0);
  const std::vector<AmplifierStage> three{{10.0, 100.0}, {300.0, 10.0}, {1000.0, 5.0}};
  CHECK(friis_cascade(three) == doctest::Approx(10.0 + 3.0 + 1.0));
  CHECK_THROWS_AS(friis_cascade({}), std::domain_error);
  const std::vector<AmplifierStage> bad{{10.0, 0.0}};
  CHECK_THROWS_AS(friis_cascade(bad), std::domain_error);
}

TEST_CASE("Friis cascade is associative over stage grouping (randomized)") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(1.0, 1000.0), g(1.5, 1000.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<AmplifierStage> s(2 + rng() % 5);
    for (auto& st : s) st = {t(rng), g(rng)};
    const std::size_t split = 1 + rng() % (s.size() - 1);
    const std::span<const AmplifierStage> all(s);
    double g_head = 1.0;
    for (std::size_t i = 0; i < split; ++i) g_head *= s[i].linear_gain;
    double g_tail = 1.0;
    for (std::size_t i = split; i < s.size(); ++i) g_tail *= s[i].linear_gain;
    const std::vector<AmplifierStage> grouped{{friis_cascade(all.first(split)), g_head},
                                              {friis_cascade(all.subspan(split)), g_tail}};
    CHECK(friis_cascade(grouped) == doctest::Approx(friis_cascade(all)).epsilon(1e-12));
  }
}

TEST_CASE("Y-factor noise temperature") {
  const auto ok = y_factor_noise_temperature(305.6, 92.6, 305.6 / 92.6);
  CHECK_FALSE(ok.clamped);
  CHECK(ok.temperature_k == doctest::Approx(0.0).epsilon(1e-9));

  const double t_dut = 15.6;
  const double y = (305.6 + t_dut) / (92.6 + t_dut);
  const auto r = y_factor_noise_temperature(305.6, 92.6, y);
  CHECK_FALSE(r.clamped);
  CHECK(r.temperature_k == doctest::Approx(t_dut).epsilon(1e-12));

  const auto neg = y_factor_noise_temperature(290.0, 77.0, 6.0);
  CHECK(neg.clamped);
  CHECK(neg.temperature_k == 0.0);

  CHECK_THROWS_AS(y_factor_noise_temperature(290.0, 77.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(y_factor_noise_temperature(290.0, 77.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(y_factor_noise_temperature(77.0, 290.0, 2.0), std::domain_error);
}

TEST_CASE("noise figure conversions") {
  CHECK(temperature_to_noise_figure_db(18.2) == doctest::Approx(0.26435).epsilon(1e-4));
  CHECK(std::abs(temperature_to_noise_figure_db(18.2) - 0.26) <= 0.01);
  CHECK(noise_figure_db_to_temperature(0.26) == doctest::Approx(17.8917).epsilon(1e-5));
  CHECK(std::abs(noise_figure_db_to_temperature(0.26) - 18.2) <= 0.5);
  for (double nf = 0.0; nf < 10.0; nf += 0.37)
    CHECK(temperature_to_noise_figure_db(noise_figure_db_to_temperature(nf)) ==
          doctest::Approx(nf).epsilon(1e-12));
  CHECK_THROWS_AS(noise_figure_db_to_temperature(-0.1), std::domain_error);
  CHECK_THROWS_AS(temperature_to_noise_figure_db(-1.0), std::domain_error);
}

TEST_CASE("noise power reduction at reference points") {
  const auto c = reference_chain();
  CHECK(noise_power_reduction_db(108.1, 255.4, c) == doctest::Approx(-3.4632742).epsilon(1e-7));
  CHECK(std::abs(noise_power_reduction_db(108.1, 255.4, c) + 3.5) <= 0.3);
  CHECK(noise_power_reduction_db(50.0, 255.4, c) == doctest::Approx(-6.3129136).epsilon(1e-7));
  CHECK(noise_power_reduction_db(108.21747, 256.27905, c) ==
        doctest::Approx(-3.4732703).epsilon(1e-6));
  CHECK(deltap_floor_db(255.4, c) == doctest::Approx(-13.261045).epsilon(1e-7));
  CHECK(noise_power_reduction_db(200.0, 200.0, c) == 0.0);
}

TEST_CASE("noise power reduction is antisymmetric and monotone (randomized)") {
  const auto c = reference_chain();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> t(0.0, 400.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double a = t(rng), b = t(rng);
    CHECK(noise_power_reduction_db(a, b, c) ==
          doctest::Approx(-noise_power_reduction_db(b, a, c)).epsilon(1e-12));
    if (a < b) CHECK(noise_power_reduction_db(a, b, c) < 0.0);
  }
  double prev = -INFINITY;
  for (double tm = 0.0; tm <= 400.0; tm += 5.0) {
    const double d = noise_power_reduction_db(tm, 255.4, c);
    CHECK(d > prev);
    prev = d;
  }
}

TEST_CASE("receiver-limited regime compresses the reduction") {
  ReceiverChain noisy;
  noisy.t_rec_k = 1e9;
  CHECK(std::abs(noise_power_reduction_db(0.0, 255.4, noisy)) < 0.01);
  ReceiverChain quiet;
  quiet.front_end.t_min_k = 0.0;
  quiet.front_end.noise_resistance_ohm = 0.0;
  quiet.t_rec_k = 0.0;
  CHECK(noise_power_reduction_db(127.7, 255.4, quiet) == doctest::Approx(10 * std::log10(0.5)));
}

TEST_CASE("distinct reference chain") {
  ReceiverChain warm;
  warm.t_rec_k = 100.0;
  const auto c = reference_chain();
  CHECK(noise_power_reduction_db(100.0, c, 100.0, c) == 0.0);
  CHECK(noise_power_reduction_db(100.0, c, 100.0, warm) < 0.0);
}

TEST_CASE("source reflection reduces the coupled mode noise") {
  ReceiverChain c;
  c.gamma_c = {0.3, 0.0};
  const double matched = noise_power_reduction_db(50.0, 255.4, reference_chain());
  const double mismatched = noise_power_reduction_db(50.0, 255.4, c);
  CHECK(mismatched > matched);
  c.gamma_c = {1.5, 0.0};
  CHECK_THROWS_AS(noise_power_reduction_db(50.0, 255.4, c), std::domain_error);
}

TEST_CASE("mode temperature inference round trip") {
  const auto c = reference_chain();
  for (double tm = 0.5; tm < 255.4; tm += 7.3) {
    const double d = noise_power_reduction_db(tm, 255.4, c);
    const double back = infer_mode_temperature(d, 255.4, c);
    CHECK(std::abs(noise_power_reduction_db(back, 255.4, c) - d) < 1e-6);
    CHECK(back == doctest::Approx(tm).epsilon(1e-6));
  }
  CHECK(infer_mode_temperature(0.0, 255.4, c) == doctest::Approx(255.4).epsilon(1e-9));
  CHECK(infer_mode_temperature(1.0, 255.4, c) > 255.4);
}

TEST_CASE("inference below the receiver floor names the floor") {
  const auto c = reference_chain();
  const double floor_db = deltap_floor_db(255.4, c);
  CHECK(infer_mode_temperature(floor_db, 255.4, c) == doctest::Approx(0.0).epsilon(1e-6));
  try {
    infer_mode_temperature(floor_db - 0.5, 255.4, c);
    FAIL("expected out_of_range");
  } catch (const std::out_of_range& e) {
    CHECK(std::string(e.what()).find("-13.26") != std::string::npos);
  }
}

TEST_CASE("delta P curve") {
  const auto c = reference_chain();
  const auto curve = emit_deltap_curve(c, 255.4, 0.0, 255.4, 256);
  REQUIRE(curve.size() == 256);
  CHECK(curve.front().t_mode_k == 0.0);
  CHECK(curve.back().t_mode_k == 255.4);
  CHECK(curve.front().delta_p_db == doctest::Approx(deltap_floor_db(255.4, c)));
  CHECK(curve.back().delta_p_db == doctest::Approx(0.0));
  for (std::size_t i = 1; i < curve.size(); ++i)
    CHECK(curve[i].delta_p_db > curve[i - 1].delta_p_db);
  CHECK_THROWS_AS(emit_deltap_curve(c, 255.4, 0.0, 300.0, 10), std::domain_error);
  CHECK_THROWS_AS(emit_deltap_curve(c, 255.4, 0.0, 100.0, 1), std::domain_error);
}
