// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iqshift/datastore/dataset.hpp"
#include "iqshift/siggen/profile.hpp"
#include "iqshift/train/model.hpp"

namespace iqshift::eval {

using Counts = std::vector<std::vector<std::uint64_t>>;  // [true][predicted]

struct EvalReport {
  std::string model_id;
  std::string dataset_id;
  std::vector<siggen::Modulation> classes;  // row/column labels
  std::vector<double> snr_db;               // the dataset's grid, ascending
  std::vector<Counts> confusion_by_snr;     // one C x C matrix per grid value
  std::uint64_t correct = 0;                // accumulated while scoring, not from the matrices
  std::uint64_t total = 0;

  siggen::SnrConvention snr_convention = siggen::SnrConvention::total;
  /// In-band minus total SNR used to draw the other axis (0 when both sides
  /// share a convention).
  double snr_offset_db = 0.0;
  std::map<std::string, std::string> notes;

  double overall_accuracy() const;
  Counts confusion() const;  // summed over SNR
  std::vector<double> accuracy_by_snr() const;
  /// SNR values re-expressed in the other convention (snr +/- offset).
  std::vector<double> aligned_snr_db() const;
  siggen::SnrConvention aligned_convention() const;
  /// Recall of class c at grid index s; empty if no frames of c at that SNR.
  std::optional<double> recall(std::size_t cls, std::size_t snr_index) const;
  /// Recall of each class pooled over the high-SNR values.
  std::vector<std::optional<double>> high_snr_recall() const;
  double high_snr_accuracy() const;
  std::vector<double> high_snr_values() const;
};

/// Top quartile of a grid: the ceil(n/4) largest values, ascending.
std::vector<double> high_snr_values(const std::vector<double>& grid);

struct EvalOptions {
  std::string model_id = "model";
  std::string dataset_id = "dataset";
  datastore::Split split = datastore::Split::test;
  /// Explicit dataset-class -> model-label mapping. Without one, each dataset
  /// class must appear in the model's label list.
  std::map<siggen::Modulation, siggen::Modulation> label_mapping;
};

/// Scores the classifier's argmax decisions on one split of the dataset.
/// Raises DataError(mismatch) naming the first class that cannot be mapped.
EvalReport evaluate(train::Classifier& model, const datastore::Dataset& data, const EvalOptions& opts = {});

/// evaluate() plus an SNR axis in the training profile's convention, shifted
/// by the mean in-band/total offset of whichever profile uses in-band SNR.
EvalReport cross_evaluate(train::Classifier& model, const siggen::GeneratorProfile& trained_on,
                          const datastore::Dataset& data, const EvalOptions& opts = {});

/// Classes with at least one correct high-SNR prediction and high-SNR
/// recall >= threshold.
std::vector<siggen::Modulation> retention_summary(const EvalReport& report, double threshold = 0.5);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

/// "snr_db<TAB>accuracy" rows (plus the aligned axis when an offset is set).
std::string accuracy_table(const EvalReport& report);
/// Labeled grid, rows = true class, columns = predicted class.
std::string confusion_table(const Counts& counts, const std::vector<siggen::Modulation>& classes);

}  // namespace iqshift::eval
