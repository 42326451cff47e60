// SPDX-License-Identifier: Apache-2.0
// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// leaves datasets' reports, histories and checkpoints under --workdir.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "iqshift/common/binary_io.hpp"
#include "iqshift/datastore/frame.hpp"
#include "iqshift/datastore/modf.hpp"
#include "iqshift/eval/evaluator.hpp"
#include "iqshift/selftest.hpp"
#include "iqshift/siggen/generate.hpp"
#include "iqshift/train/trainer.hpp"
#include "support/test_support.hpp"

namespace fs = std::filesystem;
using namespace iqshift;
using siggen::Modulation;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

void print(int id, const Outcome& o) {
  std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(prec) << v;
  return s.str();
}

// ---- 1: gradients ----------------------------------------------------------

Outcome gradients() {
  const auto t0 = Clock::now();
  selftest::GradientOptions opts;
  opts.instances = 20;
  opts.tolerance = 1e-4;
  const auto res = selftest::gradient_suite(opts);
  const double secs = seconds_since(t0);
  double worst = 0.0;
  std::string worst_name;
  std::size_t failed = 0;
  for (const auto& r : res) {
    if (!r.passed) ++failed;
    if (r.value > worst) {
      worst = r.value;
      worst_name = r.name;
    }
  }
  const bool pass = failed == 0 && !res.empty() && worst < 1e-4 && secs < 60.0;
  return {pass, std::to_string(res.size()) + " checks x " + std::to_string(opts.instances) +
                    " instances, failed=" + std::to_string(failed) + ", worst rel err " + fmt(worst * 1e6, 3) +
                    "e-6 (" + worst_name + "), " + fmt(secs, 1) + " s"};
}

// ---- 2: layout tables -------------------------------------------------------

Outcome layouts() {
  std::string problems;
  auto with_input = [](const zoo::ModelGraph& g) {
    auto rows = g.table_trace();
    if (rows.empty() || rows.front().layer != "Input") rows.insert(rows.begin(), {"Input", g.input_shape});
    return rows;
  };
  std::size_t rows_checked = 0;
  for (std::size_t c : {6u, 24u}) {
    const auto rn = zoo::build_resnet(c);
    const auto cnn = zoo::build_cnn(c);
    const auto rn_fix = testsupport::load_fixture("resnet_layout.tsv");
    const auto cnn_fix = testsupport::load_fixture("cnn_layout.tsv");
    if (auto d = testsupport::compare_trace(with_input(rn), rn_fix, {{"C", c}}); !d.empty())
      problems += " resnet(C=" + std::to_string(c) + "): " + d;
    if (auto d = testsupport::compare_trace(with_input(cnn), cnn_fix, {{"C", c}}); !d.empty())
      problems += " cnn(C=" + std::to_string(c) + "): " + d;
    rows_checked += rn_fix.size() + cnn_fix.size();
    const auto stack_fix = testsupport::load_fixture("residual_stack_layout.tsv");
    std::size_t x = 2, y = 1024;
    for (std::size_t row = 1; row <= 6; ++row, x = 32, y /= 2) {
      if (auto d = testsupport::compare_trace(rn.expand_row(row), stack_fix, {{"X", x}, {"Y", y}}); !d.empty())
        problems += " stack " + std::to_string(row) + ": " + d;
      rows_checked += stack_fix.size();
    }
  }
  const auto unit_fix = testsupport::load_fixture("residual_unit_layout.tsv");
  const auto unit = nn::LayerSpec::residual(zoo::residual_unit_body());
  if (auto d = testsupport::compare_trace(zoo::residual_unit_trace(unit, {32, 1024}), unit_fix, {{"X", 32}, {"Y", 1024}});
      !d.empty())
    problems += " unit: " + d;
  rows_checked += unit_fix.size();
  const auto rn = with_input(zoo::build_resnet(6));
  const auto cnn = with_input(zoo::build_cnn(6));
  const std::string key = "resnet pre-head " + nn::shape_string(rn[6].shape) + ", cnn after pooling " +
                          nn::shape_string(cnn[cnn.size() - 2].shape);
  return {problems.empty(), std::to_string(rows_checked) + " rows match; " + key + problems};
}

// ---- 3: DSP -------------------------------------------------------------------

Outcome dsp() {
  const auto t0 = Clock::now();
  const auto res = selftest::dsp_suite();
  const double secs = seconds_since(t0);
  double isi = 0.0, snr = 0.0, offset = 0.0;
  std::size_t failed = 0, isi_n = 0, snr_n = 0;
  bool have_offset = false;
  for (const auto& r : res) {
    if (!r.passed) ++failed;
    if (r.name.rfind("srrc_isi", 0) == 0) {
      isi = std::max(isi, r.value);
      ++isi_n;
    } else if (r.name.rfind("snr_calibration", 0) == 0) {
      snr = std::max(snr, r.value);
      ++snr_n;
    } else if (r.name == "profile_b_offset_vs_8dB") {
      offset = r.value;
      have_offset = true;
    }
  }
  const double est = siggen::snr_offset_estimate(siggen::default_profile_b());
  const bool pass = failed == 0 && isi_n == 9 && isi < 1e-3 && snr_n >= 2 && snr < 0.3 && have_offset &&
                    std::abs(est - 8.0) <= 1.5 && secs < 60.0;
  return {pass, "max ISI " + fmt(isi * 1e3, 3) + "e-3 over " + std::to_string(isi_n) + " filters, max SNR error " +
                    fmt(snr, 3) + " dB, profile B offset " + fmt(est, 3) + " dB (|d|=" + fmt(offset, 3) +
                    "), failed=" + std::to_string(failed) + ", " + fmt(secs, 1) + " s"};
}

// ---- 4: dataset arithmetic ----------------------------------------------------

Outcome arithmetic() {
  siggen::Samples x(32768);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = {std::cos(0.01 * n), std::sin(0.013 * n)};
  const auto frames = datastore::slice_long_signal(x, siggen::FrameMeta{});
  const auto a = siggen::frame_count(24, 26, 4096, 1);
  const auto b = siggen::frame_count(1, 1, 112000, 32);

  datastore::DatasetManifest m;
  m.profile = siggen::default_profile_a();
  m.profile.classes = {Modulation::bpsk};
  m.profile.snr_grid_db = {0.0};
  m.signals_per_cell = 4096;
  m.frame_count = 4096;
  m = datastore::partition(m, {0.75, 0.125, 0.125}, 1);
  std::array<std::size_t, 3> n{};
  for (auto s : m.splits) ++n[static_cast<int>(s)];

  const bool pass = frames.size() == 32 && a == 2555904 && b == 3584000 && n[0] == 3072 && n[1] == 512 && n[2] == 512;
  return {pass, "slices=" + std::to_string(frames.size()) + ", A total=" + std::to_string(a) + ", B total=" +
                    std::to_string(b) + ", split " + std::to_string(n[0]) + "/" + std::to_string(n[1]) + "/" +
                    std::to_string(n[2])};
}

// ---- 5-7: experiments ---------------------------------------------------------

const std::vector<Modulation> kClasses{Modulation::bpsk,  Modulation::qpsk,  Modulation::psk8,
                                       Modulation::qam16, Modulation::qam64, Modulation::qam256};
constexpr std::uint64_t kDataSeedA = 7;
constexpr std::uint64_t kDataSeedB = 11;
constexpr std::uint64_t kTrainSeed = 1;

datastore::Dataset make_a() {
  auto p = siggen::default_profile_a();
  p.classes = kClasses;
  p.snr_grid_db = {-4, -2, 0, 2, 4, 6, 8, 10};
  auto ds = siggen::generate_dataset(p, 600, kDataSeedA, 1);
  ds.manifest = datastore::partition(ds.manifest, {0.75, 0.125, 0.125}, kDataSeedA);
  return ds;
}

datastore::Dataset make_b() {
  auto p = siggen::default_profile_b();
  p.classes = kClasses;
  auto ds = siggen::generate_dataset(p, 8, kDataSeedB, 1);
  ds.manifest = datastore::partition(ds.manifest, {0.75, 0.125, 0.125}, kDataSeedB);
  return ds;
}

struct Trained {
  train::TrainHistory history;
  nn::Checkpoint best;
  double seconds = 0.0;
};

Trained train_cnn(const datastore::Dataset& ds, const fs::path& dir) {
  auto cfg = train::TrainConfig::reference();
  cfg.epochs = 12;
  cfg.batch_size = 256;
  cfg.seed = kTrainSeed;
  cfg.out_dir = dir.string();
  cfg.log = [](const std::string& m) { std::cerr << "  " << m << std::endl; };
  const auto t0 = Clock::now();
  auto res = train::train(zoo::build_cnn(ds.manifest.profile.classes), ds, cfg);
  return {std::move(res.history), std::move(res.best), seconds_since(t0)};
}

void save_report(const eval::EvalReport& r, const fs::path& dir, const std::string& stem) {
  write_text_file((dir / (stem + ".json")).string(), eval::report_to_json(r));
  write_text_file((dir / (stem + "_accuracy.tsv")).string(), eval::accuracy_table(r));
  write_text_file((dir / (stem + "_confusion.tsv")).string(), eval::confusion_table(r.confusion(), r.classes));
}

struct Experiments {
  fs::path workdir;
  std::optional<datastore::Dataset> a, b;
  std::optional<Trained> run_a;
  std::vector<std::uint8_t> a_bytes;
  std::optional<eval::EvalReport> within_a;

  Outcome within() {
    if (!a) {
      std::cerr << "generating profile A" << std::endl;
      a = make_a();
      a_bytes = datastore::encode_dataset(*a);
    }
    std::cerr << "training CNN on profile A (" << a->count(datastore::Split::train) << " frames, reference mode)"
              << std::endl;
    run_a = train_cnn(*a, workdir / "run_a");
    auto model = train::Model::from_checkpoint(run_a->best);
    model.threads = 1;
    eval::EvalOptions opts;
    opts.model_id = "cnn-A";
    opts.dataset_id = "A";
    within_a = eval::evaluate(model, *a, opts);
    save_report(*within_a, workdir, "within_A");

    const auto acc = within_a->accuracy_by_snr();
    const double rho = testsupport::spearman(within_a->snr_db, acc);
    const double high = within_a->high_snr_accuracy();
    const auto recall = within_a->high_snr_recall();
    const double bpsk = recall[0].value_or(0.0), qpsk = recall[1].value_or(0.0);
    std::string curve;
    for (std::size_t i = 0; i < acc.size(); ++i) curve += (i ? " " : "") + fmt(acc[i], 3);
    const bool pass = rho > 0.8 && high >= 0.55 && bpsk >= 0.9 && qpsk >= 0.9;
    return {pass, "spearman " + fmt(rho, 3) + " (>0.8), high-SNR acc " + fmt(high, 3) + " (>=0.55), recall BPSK " +
                      fmt(bpsk, 3) + " QPSK " + fmt(qpsk, 3) + " (>=0.9); acc by SNR [" + curve + "]; best epoch " +
                      std::to_string(run_a->history.best_epoch()) + ", train " + fmt(run_a->seconds / 60.0, 1) +
                      " min"};
  }

  Outcome cross() {
    if (!run_a || !within_a) return {false, "needs criterion 5"};
    std::cerr << "generating profile B" << std::endl;
    b = make_b();
    std::cerr << "training CNN on profile B (" << b->count(datastore::Split::train) << " frames, reference mode)"
              << std::endl;
    const auto run_b = train_cnn(*b, workdir / "run_b");
    auto model_a = train::Model::from_checkpoint(run_a->best);
    auto model_b = train::Model::from_checkpoint(run_b.best);
    model_a.threads = model_b.threads = 1;
    const auto pa = a->manifest.profile, pb = b->manifest.profile;

    eval::EvalOptions o;
    o.model_id = "cnn-B";
    o.dataset_id = "B";
    const auto within_b = eval::evaluate(model_b, *b, o);
    o.model_id = "cnn-A";
    const auto a_on_b = eval::cross_evaluate(model_a, pa, *b, o);
    o.model_id = "cnn-B";
    o.dataset_id = "A";
    const auto b_on_a = eval::cross_evaluate(model_b, pb, *a, o);
    save_report(within_b, workdir, "within_B");
    save_report(a_on_b, workdir, "cross_A_on_B");
    save_report(b_on_a, workdir, "cross_B_on_A");

    const double wa = within_a->high_snr_accuracy(), wb = within_b.high_snr_accuracy();
    const double ab = a_on_b.high_snr_accuracy(), ba = b_on_a.high_snr_accuracy();
    const double gap_a = wa - ab, gap_b = wb - ba;
    const bool pass = gap_a >= 0.15 || gap_b >= 0.15;
    return {pass, "A-trained: within " + fmt(wa, 3) + " vs on B " + fmt(ab, 3) + " (gap " + fmt(gap_a, 3) +
                      "); B-trained: within " + fmt(wb, 3) + " vs on A " + fmt(ba, 3) + " (gap " + fmt(gap_b, 3) +
                      "); need >=0.15 in one direction; SNR offset " + fmt(a_on_b.snr_offset_db, 2) + " dB"};
  }

  Outcome determinism() {
    if (!run_a) return {false, "needs criterion 5"};
    std::cerr << "repeating the profile A pipeline" << std::endl;
    const auto again = make_a();
    const bool same_bytes = datastore::encode_dataset(again) == a_bytes;
    const auto rerun = train_cnn(again, workdir / "run_a_repeat");
    std::size_t same_epochs = 0;
    const auto& h1 = run_a->history.epochs;
    const auto& h2 = rerun.history.epochs;
    for (std::size_t e = 0; e < std::min(h1.size(), h2.size()); ++e)
      if (h1[e].train_loss == h2[e].train_loss && h1[e].val_loss == h2[e].val_loss &&
          h1[e].val_accuracy == h2[e].val_accuracy)
        ++same_epochs;
    const bool same_losses = h1.size() == h2.size() && same_epochs == h1.size();
    const bool same_weights = run_a->best.tensors == rerun.best.tensors;
    return {same_bytes && same_losses,
            std::string("dataset bytes ") + (same_bytes ? "identical" : "DIFFER") + " (" +
                std::to_string(a_bytes.size()) + " B), loss sequence identical for " + std::to_string(same_epochs) +
                "/" + std::to_string(h1.size()) + " epochs, best weights " + (same_weights ? "identical" : "differ")};
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iqshift acceptance run"};
  std::string workdir = "acceptance_run";
  std::vector<int> only;
  app.add_option("--workdir", workdir, "Directory for datasets' reports, histories and checkpoints");
  app.add_option("--only", only, "Run only these criteria (5 is implied by 6 and 7)")->check(CLI::Range(1, 7));
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);

  std::set<int> want(only.begin(), only.end());
  if (want.empty()) want = {1, 2, 3, 4, 5, 6, 7};
  if (want.count(6) || want.count(7)) want.insert(5);

  int failures = 0;
  auto run = [&](int id, auto&& fn) {
    if (!want.count(id)) return;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    print(id, o);
  };

  Experiments ex{fs::path(workdir)};
  run(1, gradients);
  run(2, layouts);
  run(3, dsp);
  run(4, arithmetic);
  run(5, [&] { return ex.within(); });
  run(6, [&] { return ex.cross(); });
  run(7, [&] { return ex.determinism(); });
  std::cout << "acceptance: " << want.size() - static_cast<std::size_t>(failures) << "/" << want.size()
            << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
