// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "iqshift/datastore/frame.hpp"
#include "iqshift/datastore/modf.hpp"
#include "iqshift/siggen/generate.hpp"

using namespace iqshift;
using namespace iqshift::siggen;
using datastore::Dataset;

TEST_CASE("configured counts") {
  static_assert(frame_count(24, 26, 4096, 1) == 2555904);
  static_assert(signal_count(6, 8, 250) == 12000);
  CHECK(frame_count(1, 1, 112000, kLongSignalLen / kFrameLen) == 3584000);
  CHECK(kLongSignalLen / kFrameLen == 32);
}

TEST_CASE("profile A dataset layout and labels") {
  const auto p = default_profile_a();
  const std::vector<Modulation> classes{Modulation::bpsk, Modulation::qam64};
  const std::vector<double> grid{-4.0, 6.0, 10.0};
  const Dataset ds = generate_dataset(p, classes, grid, 3, 7, 1);
  REQUIRE(ds.frames.size() == 2 * 3 * 3);
  CHECK(ds.manifest.frame_count == 18);
  CHECK(ds.manifest.slices_per_signal == 1);
  CHECK(ds.manifest.splits.empty());
  std::size_t i = 0;
  for (auto c : classes)
    for (std::size_t s = 0; s < grid.size(); ++s)
      for (std::size_t k = 0; k < 3; ++k, ++i) {
        const auto& f = ds.frames[i];
        CHECK(f.meta.cls == c);
        CHECK(f.meta.snr_db == static_cast<float>(grid[s]));
        CHECK(f.meta.seed == signal_seed(7, c, s, k));
        CHECK(f.meta.profile_id == ProfileId::A);
        CHECK(datastore::all_finite(f));
        CHECK(std::abs(datastore::frame_power(f) - 1.0) < 1e-9);
      }
}

TEST_CASE("bytes do not depend on thread count or run") {
  const auto p = default_profile_a();
  const std::vector<Modulation> classes{Modulation::qpsk, Modulation::psk8, Modulation::qam256};
  const std::vector<double> grid{0.0, 8.0};
  const auto one = datastore::encode_dataset(generate_dataset(p, classes, grid, 5, 11, 1));
  const auto two = datastore::encode_dataset(generate_dataset(p, classes, grid, 5, 11, 2));
  const auto again = datastore::encode_dataset(generate_dataset(p, classes, grid, 5, 11, 3));
  CHECK(one == two);
  CHECK(one == again);
  const auto other = datastore::encode_dataset(generate_dataset(p, classes, grid, 5, 12, 1));
  CHECK(one != other);
}

TEST_CASE("signal seeds are distinct across cells and indices") {
  std::set<std::uint64_t> seen;
  for (auto c : kAllModulations)
    for (std::size_t s = 0; s < 14; ++s)
      for (std::size_t k = 0; k < 20; ++k) seen.insert(signal_seed(3, c, s, k));
  CHECK(seen.size() == 6 * 14 * 20);
}

TEST_CASE("profile B signals are sliced into 32 sibling frames") {
  const auto p = default_profile_b();
  const Dataset ds = generate_dataset(p, {Modulation::qpsk}, {5.0}, 2, 9, 1);
  REQUIRE(ds.frames.size() == 64);
  CHECK(ds.manifest.slices_per_signal == 32);
  for (std::size_t sig = 0; sig < 2; ++sig) {
    const auto [meta, x] = synthesize_signal(p, Modulation::qpsk, 5.0, signal_seed(9, Modulation::qpsk, 0, sig));
    for (std::size_t k = 0; k < 32; ++k) {
      const auto& f = ds.frames[sig * 32 + k];
      CHECK(f.meta == meta);
      CHECK(std::abs(datastore::frame_power(f) - 1.0) < 1e-9);
      // Frame k is parent samples [k*1024, (k+1)*1024) up to one positive scale.
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < kFrameLen; ++j) {
        num += f.i(j) * x[k * kFrameLen + j].real();
        den += x[k * kFrameLen + j].real() * x[k * kFrameLen + j].real();
      }
      const double scale = num / den;
      CHECK(scale > 0.0);
      double worst = 0.0;
      for (std::size_t j = 0; j < kFrameLen; ++j) {
        worst = std::max(worst, std::abs(f.i(j) - scale * x[k * kFrameLen + j].real()));
        worst = std::max(worst, std::abs(f.q(j) - scale * x[k * kFrameLen + j].imag()));
      }
      CHECK(worst < 1e-5);
    }
  }
}

TEST_CASE("profile overload uses the profile's class list and grid") {
  auto p = default_profile_a();
  p.classes = {Modulation::bpsk, Modulation::qpsk};
  p.snr_grid_db = {0.0, 2.0};
  const Dataset ds = generate_dataset(p, 2, 1);
  CHECK(ds.frames.size() == 8);
  CHECK(ds.manifest.profile.classes == p.classes);
}

TEST_CASE("empty inputs are rejected") {
  const auto p = default_profile_a();
  CHECK_THROWS(generate_dataset(p, {}, {0.0}, 1, 1));
  CHECK_THROWS(generate_dataset(p, {Modulation::bpsk}, {}, 1, 1));
  CHECK_THROWS(generate_dataset(p, {Modulation::bpsk}, {0.0}, 0, 1));
}
