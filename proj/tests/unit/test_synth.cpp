// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "iqshift/siggen/synth.hpp"

using namespace iqshift;
using namespace iqshift::siggen;

namespace {

FrameMeta meta_for(Modulation m, double rolloff = 0.35, int sps = 8, double cfo = 0.0, double power_db = 0.0) {
  FrameMeta meta;
  meta.cls = m;
  meta.rolloff = static_cast<float>(rolloff);
  meta.sps = static_cast<std::uint16_t>(sps);
  meta.cfo = static_cast<float>(cfo);
  meta.power_scale_db = static_cast<float>(power_db);
  return meta;
}

Samples clean(const FrameMeta& m, std::size_t len, std::uint64_t seed) {
  Rng rng(seed);
  return synthesize_clean(m, min_symbols(len, m.sps, kDefaultSrrcSpan), len, rng);
}

double db(double x) { return 10.0 * std::log10(x); }

}  // namespace

TEST_CASE("real symbols through a real filter stay real") {
  const auto x = clean(meta_for(Modulation::bpsk), 1024, 3);
  double worst = 0.0;
  for (auto v : x) worst = std::max(worst, std::abs(v.imag()));
  CHECK(worst < 1e-9);
}

TEST_CASE("cfo of 0.25 rotates by 90 degrees per sample") {
  Samples x(8, Complex(1.0, 0.0));
  apply_cfo(x, 0.25);
  const Complex j(0.0, 1.0);
  Complex expect(1.0, 0.0);
  for (auto v : x) {
    CHECK(std::abs(v - expect) < 1e-12);
    expect *= j;
  }
}

TEST_CASE("cfo followed by its negative restores the signal") {
  const auto x = clean(meta_for(Modulation::qam64), 4096, 11);
  Samples y = x;
  apply_cfo(y, 0.0087);
  apply_cfo(y, -0.0087);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
  CHECK(worst < 1e-9);
}

TEST_CASE("clean frame power tracks the power scale within 0.2 dB") {
  for (auto m : kAllModulations)
    for (double p : {0.0, -3.0, 2.5}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto x = clean(meta_for(m, 0.3, 10, 0.004, p), 1024, seed);
        CHECK(std::abs(db(mean_power(x)) - p) < 0.2);
      }
    }
}

TEST_CASE("insufficient symbols are rejected") {
  Rng rng(1);
  CHECK_THROWS_AS(synthesize_clean(meta_for(Modulation::qpsk), 10, 1024, rng), std::invalid_argument);
}

TEST_CASE("noise variance formulas") {
  CHECK(noise_variance(1.0, 0.0, SnrConvention::total, 0.35, 8) == doctest::Approx(1.0));
  CHECK(noise_variance(2.0, 10.0, SnrConvention::total, 0.35, 8) == doctest::Approx(0.2));
  CHECK(noise_variance(1.0, 0.0, SnrConvention::inband, 0.35, 10) == doctest::Approx(10.0 / 1.35));
}

TEST_CASE("in-band/total offsets") {
  CHECK(inband_total_offset_db(0.35, 10) == doctest::Approx(db(10.0 / 1.35)).epsilon(1e-12));
  CHECK(inband_total_offset_db(0.35, 10) == doctest::Approx(8.70).epsilon(1e-3));
  CHECK(inband_total_offset_db(1.0, 4) == doctest::Approx(3.0103).epsilon(1e-4));
}

TEST_CASE("offset estimate for a single (rolloff, sps) pair") {
  GeneratorProfile p = default_profile_b();
  p.rolloff_range = {0.35, 0.35};
  p.sps_choices = {10};
  CHECK(snr_offset_estimate(p) == doctest::Approx(8.70).epsilon(1e-3));
  p.rolloff_range = {1.0, 1.0};
  p.sps_choices = {4};
  CHECK(snr_offset_estimate(p) == doctest::Approx(3.0103).epsilon(1e-4));
}

TEST_CASE("offset estimate matches numerical integration and sits near 8 dB") {
  const auto b = default_profile_b();
  constexpr int kSteps = 20000;  // midpoint rule over the rolloff range
  double acc = 0.0;
  for (int s : b.sps_choices)
    for (int i = 0; i < kSteps; ++i) {
      const double beta = b.rolloff_range.lo + (i + 0.5) * (b.rolloff_range.hi - b.rolloff_range.lo) / kSteps;
      acc += db(s / (1.0 + beta));
    }
  acc /= static_cast<double>(kSteps * b.sps_choices.size());
  CHECK(snr_offset_estimate(b) == doctest::Approx(acc).epsilon(1e-8));
  CHECK(std::abs(snr_offset_estimate(b) - 8.0) <= 1.5);
}

TEST_CASE("offset estimate rejects the total-SNR profile") {
  CHECK_THROWS_AS(snr_offset_estimate(default_profile_a()), std::invalid_argument);
}

TEST_CASE("measured SNR within 0.3 dB over 1e5 samples") {
  constexpr std::size_t kLen = 100000;
  for (auto conv : {SnrConvention::total, SnrConvention::inband})
    for (double snr : {-5.0, 3.0, 17.0}) {
      const auto meta = meta_for(Modulation::qam16, 0.27, 12, 0.0, 1.0);
      const auto x = clean(meta, kLen, 99);
      Rng rng(1234);
      const auto y = add_noise(x, snr, conv, meta.rolloff, meta.sps, rng);
      double pn = 0.0;
      for (std::size_t i = 0; i < kLen; ++i) pn += std::norm(y[i] - x[i]);
      pn /= kLen;
      // White noise: the occupied band holds the fraction (1 + rolloff) / sps of it.
      if (conv == SnrConvention::inband) pn *= (1.0 + meta.rolloff) / meta.sps;
      CHECK(std::abs(db(mean_power(x) / pn) - snr) < 0.3);
    }
}

TEST_CASE("profile B draws stay inside their ranges") {
  const auto b = default_profile_b();
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const auto m = draw_frame_meta(b, Modulation::qpsk, 4.0, 17, rng);
    CHECK(m.rolloff >= 0.2f);
    CHECK(m.rolloff <= 0.5f);
    CHECK(std::abs(m.cfo) <= 0.01f);
    CHECK(std::abs(m.power_scale_db) <= 3.0f);
    CHECK((m.sps == 8 || m.sps == 10 || m.sps == 12));
    CHECK(m.seed == 17);
  }
}

TEST_CASE("profile A draws are fixed") {
  const auto a = default_profile_a();
  Rng rng(5);
  const auto m = draw_frame_meta(a, Modulation::qpsk, 4.0, 17, rng);
  CHECK(m.rolloff == 0.35f);
  CHECK(m.cfo == 0.0f);
  CHECK(m.sps == 8);
  CHECK(m.power_scale_db == 0.0f);
}

TEST_CASE("a signal is a pure function of its seed") {
  const auto b = default_profile_b();
  const auto [m1, x1] = synthesize_signal(b, Modulation::psk8, 5.0, 42);
  const auto [m2, x2] = synthesize_signal(b, Modulation::psk8, 5.0, 42);
  const auto [m3, x3] = synthesize_signal(b, Modulation::psk8, 5.0, 43);
  CHECK(m1 == m2);
  CHECK(x1 == x2);
  CHECK(x1 != x3);
  CHECK(x1.size() == 32768);
}

TEST_CASE("profile invariants") {
  CHECK_NOTHROW(default_profile_a().validate());
  CHECK_NOTHROW(default_profile_b().validate());
  auto a = default_profile_a();
  a.cfo_range = {0.0, 0.01};
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
  auto b = default_profile_b();
  b.sps_choices = {8};
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  b = default_profile_b();
  b.snr_convention = SnrConvention::total;
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
}

TEST_CASE("profile text round-trip and strict keys") {
  for (const auto& p : {default_profile_a(), default_profile_b()}) CHECK(parse_profile(format_profile(p)) == p);
  CHECK_THROWS(parse_profile(format_profile(default_profile_a()) + "bogus = 1\n"));
  CHECK(load_profile("B") == default_profile_b());
}
