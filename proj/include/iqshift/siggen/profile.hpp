// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iqshift/siggen/modulation.hpp"
#include "iqshift/siggen/srrc.hpp"

namespace iqshift::siggen {

enum class ProfileId : std::uint8_t { A = 0, B = 1 };
enum class SnrConvention : std::uint8_t { total = 0, inband = 1 };

std::string to_string(ProfileId id);
std::string to_string(SnrConvention c);
ProfileId profile_id_from_string(const std::string& s);
SnrConvention snr_convention_from_string(const std::string& s);

inline constexpr int kFrameLen = 1024;
inline constexpr int kLongSignalLen = 32768;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool degenerate() const { return lo == hi; }
  bool operator==(const Interval&) const = default;
};

/// Parameter distribution of one synthetic dataset.
///
/// Profile A stands in for the fixed-parameter dataset (total SNR, one
/// roll-off, one symbol rate, no CFO). Profile B stands in for the
/// randomized dataset (in-band SNR, random roll-off, CFO, symbol rate and
/// power, long signals that are later cut into frames).
struct GeneratorProfile {
  ProfileId profile_id = ProfileId::A;
  Interval rolloff_range{0.35, 0.35};
  Interval cfo_range{0.0, 0.0};  // cycles/sample
  std::vector<int> sps_choices{8};
  SnrConvention snr_convention = SnrConvention::total;
  Interval power_scale_db_range{0.0, 0.0};
  int frame_len = kFrameLen;
  int long_signal_len = 0;  // profile B only
  int srrc_span = kDefaultSrrcSpan;

  // Dataset-level defaults carried by profile files.
  std::vector<Modulation> classes{kAllModulations.begin(), kAllModulations.end()};
  std::vector<double> snr_grid_db;

  /// Throws std::invalid_argument when the profile breaks its invariants.
  void validate() const;

  /// Samples per generated signal before slicing.
  int signal_len() const { return profile_id == ProfileId::B ? long_signal_len : frame_len; }
  int slices_per_signal() const { return signal_len() / frame_len; }

  bool operator==(const GeneratorProfile&) const = default;
};

GeneratorProfile default_profile_a();
GeneratorProfile default_profile_b();
GeneratorProfile builtin_profile(const std::string& id);

/// Profile files are `key = value` text:
///
///   profile_id = B
///   rolloff_min = 0.2          rolloff_max = 0.5
///   cfo_min = -0.01            cfo_max = 0.01        (cycles/sample)
///   sps_choices = 8,10,12
///   snr_convention = INBAND    (TOTAL | INBAND)
///   power_scale_db_min = -3    power_scale_db_max = 3
///   frame_len = 1024
///   long_signal_len = 32768    (0 or absent for profile A)
///   srrc_span = 40             (optional)
///   classes = BPSK,QPSK,8PSK,16QAM,64QAM,256QAM   (optional)
///   snr_grid_db = 0:1:13       (optional; lo:step:hi or a comma list)
GeneratorProfile parse_profile(const std::string& text);
GeneratorProfile load_profile(const std::string& path_or_builtin);
std::string format_profile(const GeneratorProfile& p);

/// Generation metadata carried by every frame. Real fields are stored in
/// 32-bit precision, which is also the precision used for synthesis, so the
/// metadata describes the frame exactly.
struct FrameMeta {
  Modulation cls = Modulation::bpsk;
  float snr_db = 0.0f;
  float rolloff = 0.35f;
  float cfo = 0.0f;
  std::uint16_t sps = 8;
  float power_scale_db = 0.0f;
  std::uint64_t seed = 0;
  ProfileId profile_id = ProfileId::A;

  bool operator==(const FrameMeta&) const = default;
};

}  // namespace iqshift::siggen
