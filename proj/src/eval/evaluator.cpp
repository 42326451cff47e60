// SPDX-License-Identifier: Apache-2.0
#include "iqshift/eval/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "iqshift/common/config.hpp"
#include "iqshift/common/error.hpp"
#include "iqshift/siggen/synth.hpp"
#include "json.hpp"

namespace iqshift::eval {

using datastore::Dataset;
using nlohmann::json;
using siggen::Modulation;

namespace {

Counts zero_counts(std::size_t c) { return Counts(c, std::vector<std::uint64_t>(c, 0)); }

std::size_t index_of(const std::vector<Modulation>& v, Modulation m) {
  return static_cast<std::size_t>(std::find(v.begin(), v.end(), m) - v.begin());
}

std::vector<std::size_t> high_indices(const std::vector<double>& grid) {
  const auto high = high_snr_values(grid);
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < grid.size(); ++s)
    if (std::find(high.begin(), high.end(), grid[s]) != high.end()) out.push_back(s);
  return out;
}

}  // namespace

std::vector<double> high_snr_values(const std::vector<double>& grid) {
  std::vector<double> g = grid;
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  const std::size_t k = (g.size() + 3) / 4;
  return std::vector<double>(g.end() - static_cast<std::ptrdiff_t>(k), g.end());
}

double EvalReport::overall_accuracy() const {
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

Counts EvalReport::confusion() const {
  Counts sum = zero_counts(classes.size());
  for (const auto& m : confusion_by_snr)
    for (std::size_t t = 0; t < m.size(); ++t)
      for (std::size_t p = 0; p < m[t].size(); ++p) sum[t][p] += m[t][p];
  return sum;
}

std::vector<double> EvalReport::accuracy_by_snr() const {
  std::vector<double> out;
  for (const auto& m : confusion_by_snr) {
    std::uint64_t hit = 0, n = 0;
    for (std::size_t t = 0; t < m.size(); ++t)
      for (std::size_t p = 0; p < m[t].size(); ++p) {
        n += m[t][p];
        if (t == p) hit += m[t][p];
      }
    out.push_back(n ? static_cast<double>(hit) / static_cast<double>(n) : 0.0);
  }
  return out;
}

siggen::SnrConvention EvalReport::aligned_convention() const {
  return snr_convention == siggen::SnrConvention::total ? siggen::SnrConvention::inband : siggen::SnrConvention::total;
}

std::vector<double> EvalReport::aligned_snr_db() const {
  std::vector<double> out;
  const double shift = snr_convention == siggen::SnrConvention::total ? snr_offset_db : -snr_offset_db;
  for (double s : snr_db) out.push_back(s + shift);
  return out;
}

std::optional<double> EvalReport::recall(std::size_t cls, std::size_t snr_index) const {
  const auto& row = confusion_by_snr.at(snr_index).at(cls);
  std::uint64_t n = 0;
  for (auto v : row) n += v;
  if (!n) return std::nullopt;
  return static_cast<double>(row[cls]) / static_cast<double>(n);
}

std::vector<double> EvalReport::high_snr_values() const { return eval::high_snr_values(snr_db); }

std::vector<std::optional<double>> EvalReport::high_snr_recall() const {
  std::vector<std::optional<double>> out(classes.size());
  const auto idx = high_indices(snr_db);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::uint64_t hit = 0, n = 0;
    for (auto s : idx) {
      for (auto v : confusion_by_snr[s][c]) n += v;
      hit += confusion_by_snr[s][c][c];
    }
    if (n) out[c] = static_cast<double>(hit) / static_cast<double>(n);
  }
  return out;
}

double EvalReport::high_snr_accuracy() const {
  std::uint64_t hit = 0, n = 0;
  for (auto s : high_indices(snr_db)) {
    const auto& m = confusion_by_snr[s];
    for (std::size_t t = 0; t < m.size(); ++t)
      for (std::size_t p = 0; p < m[t].size(); ++p) {
        n += m[t][p];
        if (t == p) hit += m[t][p];
      }
  }
  return n ? static_cast<double>(hit) / static_cast<double>(n) : 0.0;
}

EvalReport evaluate(train::Classifier& model, const Dataset& data, const EvalOptions& opts) {
  const auto& classes = model.classes();
  const auto& m = data.manifest;
  std::vector<int> truth_of(siggen::kAllModulations.size(), -1);
  for (Modulation c : m.profile.classes) {
    Modulation target = c;
    if (auto it = opts.label_mapping.find(c); it != opts.label_mapping.end()) target = it->second;
    const std::size_t k = index_of(classes, target);
    if (k == classes.size())
      throw DataError(DataError::Kind::mismatch, "dataset class " + siggen::name(c) + " has no model label");
    truth_of[static_cast<int>(c)] = static_cast<int>(k);
  }

  EvalReport r;
  r.model_id = opts.model_id;
  r.dataset_id = opts.dataset_id;
  r.classes = classes;
  r.snr_db = m.profile.snr_grid_db;
  r.snr_convention = m.profile.snr_convention;
  r.confusion_by_snr.assign(r.snr_db.size(), zero_counts(classes.size()));
  r.notes["split"] = datastore::to_string(opts.split);
  r.notes["class_scoring"] = "dataset frames scored over the model's full label list; only classes shared by "
                             "both profiles are present";
  if (!opts.label_mapping.empty()) r.notes["label_mapping"] = "explicit";

  const auto frames = data.indices(opts.split);
  const auto pred = model.predict(data, frames);
  if (pred.size() != frames.size()) throw std::logic_error("classifier returned the wrong number of predictions");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::size_t f = frames[i];
    const int t = truth_of[static_cast<int>(data.frames[f].meta.cls)];
    if (t < 0)
      throw DataError(DataError::Kind::mismatch,
                      "frame labelled " + siggen::name(data.frames[f].meta.cls) + " is outside the dataset class list");
    const int p = pred[i];
    if (p < 0 || static_cast<std::size_t>(p) >= classes.size())
      throw std::logic_error("classifier predicted an out-of-range label");
    const std::size_t s = m.cell_of(f) % r.snr_db.size();
    r.confusion_by_snr[s][static_cast<std::size_t>(t)][static_cast<std::size_t>(p)] += 1;
    ++r.total;
    if (p == t) ++r.correct;
  }

  // Reports present the grid ascending.
  std::vector<std::size_t> order(r.snr_db.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return r.snr_db[a] < r.snr_db[b]; });
  std::vector<double> snr;
  std::vector<Counts> conf;
  for (auto i : order) {
    snr.push_back(r.snr_db[i]);
    conf.push_back(std::move(r.confusion_by_snr[i]));
  }
  r.snr_db = std::move(snr);
  r.confusion_by_snr = std::move(conf);
  return r;
}

EvalReport cross_evaluate(train::Classifier& model, const siggen::GeneratorProfile& trained_on, const Dataset& data,
                          const EvalOptions& opts) {
  EvalReport r = evaluate(model, data, opts);
  const auto& tested = data.manifest.profile;
  r.notes["trained_profile"] = siggen::to_string(trained_on.profile_id);
  r.notes["tested_profile"] = siggen::to_string(tested.profile_id);
  if (trained_on.snr_convention == tested.snr_convention) {
    r.snr_offset_db = 0.0;
    r.notes["snr_alignment"] = "none (shared convention)";
    return r;
  }
  const auto& inband = tested.snr_convention == siggen::SnrConvention::inband ? tested : trained_on;
  r.snr_offset_db = siggen::snr_offset_estimate(inband);
  r.notes["snr_alignment"] = "mean in-band/total offset of profile " + siggen::to_string(inband.profile_id);
  return r;
}

std::vector<Modulation> retention_summary(const EvalReport& report, double threshold) {
  std::vector<Modulation> out;
  const auto idx = high_indices(report.snr_db);
  const auto recall = report.high_snr_recall();
  for (std::size_t c = 0; c < report.classes.size(); ++c) {
    std::uint64_t hit = 0;
    for (auto s : idx) hit += report.confusion_by_snr[s][c][c];
    if (hit > 0 && recall[c] && *recall[c] >= threshold) out.push_back(report.classes[c]);
  }
  return out;
}

std::string report_to_json(const EvalReport& r) {
  json j;
  j["model_id"] = r.model_id;
  j["dataset_id"] = r.dataset_id;
  std::vector<std::string> names;
  for (auto c : r.classes) names.push_back(siggen::name(c));
  j["classes"] = names;
  j["snr_convention"] = siggen::to_string(r.snr_convention);
  j["snr_offset_db"] = r.snr_offset_db;
  j["aligned_convention"] = siggen::to_string(r.aligned_convention());
  j["correct"] = r.correct;
  j["total"] = r.total;
  j["overall_accuracy"] = r.overall_accuracy();
  j["high_snr_db"] = r.high_snr_values();
  j["high_snr_accuracy"] = r.high_snr_accuracy();
  const auto acc = r.accuracy_by_snr();
  const auto aligned = r.aligned_snr_db();
  json rows = json::array();
  for (std::size_t s = 0; s < r.snr_db.size(); ++s) {
    json recall = json::array();
    for (std::size_t c = 0; c < r.classes.size(); ++c) {
      const auto v = r.recall(c, s);
      recall.push_back(v ? json(*v) : json(nullptr));
    }
    rows.push_back({{"snr_db", r.snr_db[s]},
                    {"aligned_snr_db", aligned[s]},
                    {"accuracy", acc[s]},
                    {"recall", recall},
                    {"confusion", r.confusion_by_snr[s]}});
  }
  j["per_snr"] = rows;
  j["confusion"] = r.confusion();
  std::vector<std::string> kept;
  for (auto c : retention_summary(r)) kept.push_back(siggen::name(c));
  j["retained_classes"] = kept;
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    EvalReport r;
    r.model_id = j.at("model_id").get<std::string>();
    r.dataset_id = j.at("dataset_id").get<std::string>();
    for (const auto& n : j.at("classes")) r.classes.push_back(siggen::modulation_from_name(n.get<std::string>()));
    r.snr_convention = siggen::snr_convention_from_string(j.at("snr_convention").get<std::string>());
    r.snr_offset_db = j.at("snr_offset_db").get<double>();
    r.correct = j.at("correct").get<std::uint64_t>();
    r.total = j.at("total").get<std::uint64_t>();
    for (const auto& row : j.at("per_snr")) {
      r.snr_db.push_back(row.at("snr_db").get<double>());
      r.confusion_by_snr.push_back(row.at("confusion").get<Counts>());
    }
    r.notes = j.at("notes").get<std::map<std::string, std::string>>();
    for (const auto& m : r.confusion_by_snr) {
      if (m.size() != r.classes.size()) throw DataError(DataError::Kind::structure, "confusion matrix size mismatch");
      for (const auto& row : m)
        if (row.size() != r.classes.size())
          throw DataError(DataError::Kind::structure, "confusion matrix size mismatch");
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(DataError::Kind::structure, std::string("report JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(DataError::Kind::structure, std::string("report JSON: ") + e.what());
  }
}

std::string accuracy_table(const EvalReport& r) {
  std::ostringstream out;
  const bool aligned = r.snr_offset_db != 0.0;
  out << "snr_db_" << siggen::to_string(r.snr_convention);
  if (aligned) out << "\tsnr_db_" << siggen::to_string(r.aligned_convention());
  out << "\taccuracy\n";
  const auto acc = r.accuracy_by_snr();
  const auto other = r.aligned_snr_db();
  for (std::size_t s = 0; s < r.snr_db.size(); ++s) {
    out << format_double(r.snr_db[s]);
    if (aligned) out << "\t" << format_double(other[s]);
    out << "\t" << format_double(acc[s]) << "\n";
  }
  return out.str();
}

std::string confusion_table(const Counts& counts, const std::vector<Modulation>& classes) {
  std::ostringstream out;
  out << "true\\pred";
  for (auto c : classes) out << "\t" << siggen::name(c);
  out << "\n";
  for (std::size_t t = 0; t < counts.size(); ++t) {
    out << siggen::name(classes.at(t));
    for (auto v : counts[t]) out << "\t" << v;
    out << "\n";
  }
  return out.str();
}

}  // namespace iqshift::eval
