// SPDX-License-Identifier: Apache-2.0
#include "iqshift/siggen/profile.hpp"

#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "iqshift/common/config.hpp"

namespace iqshift::siggen {

std::string to_string(ProfileId id) { return id == ProfileId::A ? "A" : "B"; }
std::string to_string(SnrConvention c) { return c == SnrConvention::total ? "TOTAL" : "INBAND"; }

ProfileId profile_id_from_string(const std::string& s) {
  if (s == "A" || s == "a") return ProfileId::A;
  if (s == "B" || s == "b") return ProfileId::B;
  throw std::invalid_argument("unknown profile id '" + s + "'");
}

SnrConvention snr_convention_from_string(const std::string& s) {
  if (s == "TOTAL" || s == "total") return SnrConvention::total;
  if (s == "INBAND" || s == "inband") return SnrConvention::inband;
  throw std::invalid_argument("unknown SNR convention '" + s + "'");
}

void GeneratorProfile::validate() const {
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("profile " + to_string(profile_id) + ": " + why);
  };
  if (!(rolloff_range.lo > 0.0 && rolloff_range.hi <= 1.0 && rolloff_range.lo <= rolloff_range.hi))
    fail("rolloff range must be a closed interval inside (0, 1]");
  if (cfo_range.lo > cfo_range.hi) fail("cfo range is inverted");
  if (power_scale_db_range.lo > power_scale_db_range.hi) fail("power scale range is inverted");
  if (sps_choices.empty()) fail("no samples-per-symbol choices");
  for (int s : sps_choices)
    if (s < 2) fail("samples per symbol must be >= 2");
  if (frame_len != kFrameLen) fail("frame_len must be " + std::to_string(kFrameLen));
  if (srrc_span < 2 || srrc_span % 2 != 0) fail("srrc_span must be even");
  if (classes.empty()) fail("empty class list");

  if (profile_id == ProfileId::A) {
    if (snr_convention != SnrConvention::total) fail("profile A uses the TOTAL SNR convention");
    if (cfo_range.lo != 0.0 || cfo_range.hi != 0.0) fail("profile A has no CFO");
    if (sps_choices.size() != 1) fail("profile A has a single samples-per-symbol value");
    if (!rolloff_range.degenerate()) fail("profile A has a single roll-off value");
    if (power_scale_db_range.lo != 0.0 || power_scale_db_range.hi != 0.0) fail("profile A has no power randomization");
    if (long_signal_len != 0) fail("profile A has no long signals");
  } else {
    if (snr_convention != SnrConvention::inband) fail("profile B uses the INBAND SNR convention");
    if (rolloff_range.degenerate()) fail("profile B needs a non-degenerate roll-off range");
    if (cfo_range.degenerate()) fail("profile B needs a non-degenerate CFO range");
    if (sps_choices.size() < 2) fail("profile B needs at least two samples-per-symbol choices");
    if (long_signal_len != kLongSignalLen) fail("profile B long signals are " + std::to_string(kLongSignalLen) + " samples");
  }
}

GeneratorProfile default_profile_a() {
  GeneratorProfile p;
  p.profile_id = ProfileId::A;
  p.snr_grid_db = parse_grid("-20:2:30");
  return p;
}

GeneratorProfile default_profile_b() {
  GeneratorProfile p;
  p.profile_id = ProfileId::B;
  p.rolloff_range = {0.2, 0.5};
  p.cfo_range = {-0.01, 0.01};
  p.sps_choices = {8, 10, 12};
  p.snr_convention = SnrConvention::inband;
  p.power_scale_db_range = {-3.0, 3.0};
  p.long_signal_len = kLongSignalLen;
  p.snr_grid_db = parse_grid("0:1:13");
  return p;
}

GeneratorProfile builtin_profile(const std::string& id) {
  return profile_id_from_string(id) == ProfileId::A ? default_profile_a() : default_profile_b();
}

GeneratorProfile parse_profile(const std::string& text) {
  const auto cfg = KeyValueConfig::parse(text);
  static const char* known[] = {"profile_id", "rolloff_min", "rolloff_max", "cfo_min", "cfo_max",
                                "sps_choices", "snr_convention", "power_scale_db_min", "power_scale_db_max",
                                "frame_len", "long_signal_len", "srrc_span", "classes", "snr_grid_db"};
  for (const auto& [k, v] : cfg.values()) {
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok) throw std::invalid_argument("unknown profile key '" + k + "'");
  }
  GeneratorProfile p = builtin_profile(cfg.get("profile_id"));
  if (cfg.has("rolloff_min")) p.rolloff_range.lo = cfg.get_double("rolloff_min");
  if (cfg.has("rolloff_max")) p.rolloff_range.hi = cfg.get_double("rolloff_max");
  if (cfg.has("cfo_min")) p.cfo_range.lo = cfg.get_double("cfo_min");
  if (cfg.has("cfo_max")) p.cfo_range.hi = cfg.get_double("cfo_max");
  if (auto v = cfg.find("sps_choices")) {
    p.sps_choices.clear();
    for (const auto& s : split_list(*v)) p.sps_choices.push_back(std::stoi(s));
  }
  if (auto v = cfg.find("snr_convention")) p.snr_convention = snr_convention_from_string(*v);
  if (cfg.has("power_scale_db_min")) p.power_scale_db_range.lo = cfg.get_double("power_scale_db_min");
  if (cfg.has("power_scale_db_max")) p.power_scale_db_range.hi = cfg.get_double("power_scale_db_max");
  if (cfg.has("frame_len")) p.frame_len = static_cast<int>(cfg.get_int("frame_len"));
  if (cfg.has("long_signal_len")) p.long_signal_len = static_cast<int>(cfg.get_int("long_signal_len"));
  if (cfg.has("srrc_span")) p.srrc_span = static_cast<int>(cfg.get_int("srrc_span"));
  if (auto v = cfg.find("classes")) {
    p.classes.clear();
    for (const auto& s : split_list(*v)) p.classes.push_back(modulation_from_name(s));
  }
  if (auto v = cfg.find("snr_grid_db")) p.snr_grid_db = parse_grid(*v);
  p.validate();
  return p;
}

GeneratorProfile load_profile(const std::string& path_or_builtin) {
  if (path_or_builtin == "A" || path_or_builtin == "B") return builtin_profile(path_or_builtin);
  if (!std::filesystem::exists(path_or_builtin))
    throw std::invalid_argument("profile '" + path_or_builtin + "' is neither A, B nor an existing file");
  const auto cfg = KeyValueConfig::load(path_or_builtin);
  return parse_profile(cfg.to_string());
}

std::string format_profile(const GeneratorProfile& p) {
  std::ostringstream out;
  out << "profile_id = " << to_string(p.profile_id) << "\n"
      << "rolloff_min = " << format_double(p.rolloff_range.lo) << "\n"
      << "rolloff_max = " << format_double(p.rolloff_range.hi) << "\n"
      << "cfo_min = " << format_double(p.cfo_range.lo) << "\n"
      << "cfo_max = " << format_double(p.cfo_range.hi) << "\n"
      << "sps_choices = ";
  for (std::size_t i = 0; i < p.sps_choices.size(); ++i) out << (i ? "," : "") << p.sps_choices[i];
  out << "\n"
      << "snr_convention = " << to_string(p.snr_convention) << "\n"
      << "power_scale_db_min = " << format_double(p.power_scale_db_range.lo) << "\n"
      << "power_scale_db_max = " << format_double(p.power_scale_db_range.hi) << "\n"
      << "frame_len = " << p.frame_len << "\n"
      << "long_signal_len = " << p.long_signal_len << "\n"
      << "srrc_span = " << p.srrc_span << "\n"
      << "classes = ";
  for (std::size_t i = 0; i < p.classes.size(); ++i) out << (i ? "," : "") << name(p.classes[i]);
  out << "\n"
      << "snr_grid_db = " << format_grid(p.snr_grid_db) << "\n";
  return out.str();
}

}  // namespace iqshift::siggen
