// SPDX-License-Identifier: Apache-2.0
// iqshift: generate -> train -> eval / cross-eval -> report, plus selftest.

#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "iqshift/common/binary_io.hpp"
#include "iqshift/common/config.hpp"
#include "iqshift/common/error.hpp"
#include "iqshift/datastore/dataset.hpp"
#include "iqshift/datastore/modf.hpp"
#include "iqshift/eval/evaluator.hpp"
#include "iqshift/nn/checkpoint.hpp"
#include "iqshift/selftest.hpp"
#include "iqshift/siggen/generate.hpp"
#include "iqshift/siggen/profile.hpp"
#include "iqshift/train/trainer.hpp"
#include "iqshift/zoo/model_graph.hpp"

namespace fs = std::filesystem;
using namespace iqshift;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kSelftest = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

int fail(const std::string& kind, const std::string& detail, int code) {
  std::cerr << "iqshift: error=" << kind << " detail=\"" << one_line(detail) << "\"\n";
  return code;
}

std::string default_out_dir() {
  const char* env = std::getenv("IQSHIFT_OUT_DIR");
  return env && *env ? env : ".";
}

std::string out_path(const std::string& given, const std::string& fallback_name) {
  if (!given.empty()) return given;
  return (fs::path(default_out_dir()) / fallback_name).string();
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw DataError(DataError::Kind::io, "no such file '" + path + "'");
}

struct Globals {
  int threads = 0;
  bool deterministic = false;

  int worker_count() const { return deterministic ? 1 : threads; }
};

// ---- generate -------------------------------------------------------------

struct GenerateArgs {
  std::string profile = "A";
  std::size_t frames_per_cell = 0;
  std::size_t signals_per_cell = 0;
  std::string classes;
  std::string snr_grid;
  std::uint64_t seed = 1;
  std::uint64_t split_seed = 0;
  bool split_seed_set = false;
  std::string out;
};

constexpr const char* kDeskGridA = "-4:2:10";

int run_generate(const GenerateArgs& a, const Globals& g) {
  siggen::GeneratorProfile p = siggen::load_profile(a.profile);
  if (!a.classes.empty()) {
    p.classes.clear();
    for (const auto& n : split_list(a.classes)) p.classes.push_back(siggen::modulation_from_name(n));
  }
  // Built-in A defaults to the desk-scale grid; "--snr profile" keeps the full one.
  if (a.snr_grid.empty() && a.profile == "A")
    p.snr_grid_db = parse_grid(kDeskGridA);
  else if (!a.snr_grid.empty() && a.snr_grid != "profile")
    p.snr_grid_db = parse_grid(a.snr_grid);
  p.validate();

  const std::size_t slices = p.slices_per_signal();
  std::size_t signals = a.signals_per_cell;
  if (a.frames_per_cell) {
    if (signals) throw UsageError("give either --frames-per-cell or --signals-per-cell, not both");
    if (a.frames_per_cell % slices != 0)
      throw UsageError("--frames-per-cell must be a multiple of " + std::to_string(slices) + " for profile " +
                       siggen::to_string(p.profile_id));
    signals = a.frames_per_cell / slices;
  }
  if (!signals) throw UsageError("--frames-per-cell or --signals-per-cell is required");

  datastore::Dataset ds = siggen::generate_dataset(p, signals, a.seed, g.worker_count());
  ds.manifest = datastore::partition(ds.manifest, {0.75, 0.125, 0.125}, a.split_seed_set ? a.split_seed : a.seed);
  const std::string path = out_path(a.out, "dataset.modf");
  ensure_parent(path);
  datastore::write_dataset(ds, path);
  std::cout << "wrote " << path << " frames=" << ds.frames.size() << " train=" << ds.count(datastore::Split::train)
            << " val=" << ds.count(datastore::Split::val) << " test=" << ds.count(datastore::Split::test) << "\n";
  return kOk;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string model = "cnn";
  std::string data;
  std::size_t epochs = 12;
  std::size_t batch = 256;
  double lr = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 1;
  std::string precision = "f32";
  std::size_t checkpoint_every = 1;
  std::string out;
  std::string resume;
  bool quiet = false;
};

int run_train(const TrainArgs& a, const Globals& g) {
  const zoo::ModelKind kind = zoo::model_kind_from_string(a.model);
  const train::Precision precision = train::precision_from_string(a.precision);
  require_file(a.data);
  if (!a.resume.empty()) require_file(a.resume);
  const datastore::Dataset ds = datastore::read_dataset(a.data);

  train::TrainConfig cfg;
  cfg.batch_size = a.batch;
  cfg.epochs = a.epochs;
  cfg.learning_rate = a.lr;
  cfg.momentum = a.momentum;
  cfg.seed = a.seed;
  cfg.precision = g.deterministic ? train::Precision::f64 : precision;
  cfg.checkpoint_every = a.checkpoint_every;
  cfg.threads = g.worker_count();
  cfg.out_dir = out_path(a.out, "run");
  if (!a.quiet) cfg.log = [](const std::string& m) { std::cerr << m << "\n"; };

  const zoo::ModelGraph graph = zoo::build_model(kind, ds.manifest.profile.classes);
  train::TrainResult r = a.resume.empty() ? train::train(graph, ds, cfg) : train::resume(a.resume, ds, cfg, &graph);
  if (!r.notice.empty()) std::cout << "notice: " << r.notice << "\n";
  std::cout << "trained " << zoo::to_string(graph.kind) << " epochs=" << r.history.completed()
            << " best_epoch=" << r.history.best_epoch() << " out=" << cfg.out_dir << "\n";
  return kOk;
}

// ---- eval / cross-eval --------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string split = "test";
  std::string trained_on;
  std::string model_id;
  std::string dataset_id;
  std::string out;
  std::size_t batch = 256;
};

int run_eval(const EvalArgs& a, const Globals& g, bool cross) {
  require_file(a.checkpoint);
  require_file(a.data);
  const nn::Checkpoint ckpt = nn::read_checkpoint(a.checkpoint);
  train::Model model = train::Model::from_checkpoint(ckpt);
  model.threads = g.worker_count();
  model.batch_size = a.batch;
  const datastore::Dataset ds = datastore::read_dataset(a.data);

  eval::EvalOptions opts;
  opts.split = datastore::split_from_string(a.split);
  opts.model_id = a.model_id.empty() ? fs::path(a.checkpoint).stem().string() : a.model_id;
  opts.dataset_id = a.dataset_id.empty() ? fs::path(a.data).stem().string() : a.dataset_id;

  eval::EvalReport report;
  if (cross) {
    std::optional<siggen::GeneratorProfile> trained;
    if (!a.trained_on.empty())
      trained = fs::path(a.trained_on).extension() == ".modf" ? datastore::read_dataset(a.trained_on).manifest.profile
                                                              : siggen::load_profile(a.trained_on);
    else
      trained = train::training_profile(ckpt);
    if (!trained) throw UsageError("checkpoint does not record its training profile; pass --trained-on");
    report = eval::cross_evaluate(model, *trained, ds, opts);
  } else {
    report = eval::evaluate(model, ds, opts);
  }
  report.notes["checkpoint"] = fs::path(a.checkpoint).filename().string();

  const std::string path = out_path(a.out, cross ? "cross_report.json" : "report.json");
  ensure_parent(path);
  write_text_file(path, eval::report_to_json(report));
  std::cout << "wrote " << path << " overall_accuracy=" << report.overall_accuracy()
            << " high_snr_accuracy=" << report.high_snr_accuracy() << "\n";
  return kOk;
}

// ---- report -----------------------------------------------------------------

struct ReportArgs {
  std::string in;
  std::string out_dir;
  double threshold = 0.5;
};

int run_report(const ReportArgs& a) {
  require_file(a.in);
  const eval::EvalReport r = eval::report_from_json(read_text_file(a.in));
  const fs::path dir = a.out_dir.empty() ? fs::path(default_out_dir()) : fs::path(a.out_dir);
  fs::create_directories(dir);
  const std::string stem = fs::path(a.in).stem().string();
  write_text_file((dir / (stem + "_accuracy.tsv")).string(), eval::accuracy_table(r));
  write_text_file((dir / (stem + "_confusion.tsv")).string(), eval::confusion_table(r.confusion(), r.classes));
  std::string high = "snr_db";
  for (auto c : r.classes) high += "\t" + siggen::name(c);
  high += "\n";
  for (std::size_t s = 0; s < r.snr_db.size(); ++s) {
    high += format_double(r.snr_db[s]);
    for (std::size_t c = 0; c < r.classes.size(); ++c) {
      const auto v = r.recall(c, s);
      high += "\t" + (v ? format_double(*v) : std::string("nan"));
    }
    high += "\n";
  }
  write_text_file((dir / (stem + "_recall.tsv")).string(), high);

  std::cout << "overall_accuracy\t" << format_double(r.overall_accuracy()) << "\n";
  std::cout << "high_snr_accuracy\t" << format_double(r.high_snr_accuracy()) << "\n";
  std::cout << "retained(threshold=" << a.threshold << ")\t";
  const auto kept = eval::retention_summary(r, a.threshold);
  for (std::size_t i = 0; i < kept.size(); ++i) std::cout << (i ? "," : "") << siggen::name(kept[i]);
  std::cout << "\n" << eval::accuracy_table(r);
  return kOk;
}

// ---- selftest ---------------------------------------------------------------

int run_selftest(const std::string& suite) {
  std::vector<selftest::CheckResult> results;
  if (suite == "all" || suite == "gradient") {
    auto r = selftest::gradient_suite();
    results.insert(results.end(), r.begin(), r.end());
  }
  if (suite == "all" || suite == "dsp") {
    auto r = selftest::dsp_suite();
    results.insert(results.end(), r.begin(), r.end());
  }
  std::cout << selftest::format_results(results);
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  if (failed) return fail("selftest", std::to_string(failed) + " of " + std::to_string(results.size()) + " checks failed",
                          kSelftest);
  std::cout << "selftest: " << results.size() << " checks passed\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iqshift: synthetic I/Q modulation datasets, CNN/ResNet training and dataset-shift evaluation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_flag("--deterministic", g.deterministic, "Single-threaded 64-bit reference mode");

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Synthesize a MODF dataset from a profile");
  gen->add_option("--profile", ga.profile, "Profile: A, B or a profile file")->capture_default_str();
  gen->add_option("--frames-per-cell", ga.frames_per_cell, "Frames per (class, SNR) cell");
  gen->add_option("--signals-per-cell", ga.signals_per_cell, "Generated signals per (class, SNR) cell");
  gen->add_option("--classes", ga.classes, "Comma list overriding the profile's classes");
  gen->add_option("--snr", ga.snr_grid, "SNR grid, lo:step:hi or a comma list (dB); 'profile' keeps the profile's grid. Built-in A defaults to -4:2:10");
  gen->add_option("--seed", ga.seed, "Master seed")->capture_default_str();
  gen->add_option("--split-seed", ga.split_seed, "Partition seed (default: --seed)")->each([&](const std::string&) {
    ga.split_seed_set = true;
  });
  gen->add_option("--out", ga.out, "Output .modf (default: $IQSHIFT_OUT_DIR/dataset.modf)");

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "Train a model on a dataset's TRAIN split");
  tr->add_option("--model", ta.model, "resnet or cnn")->capture_default_str();
  tr->add_option("--data", ta.data, "Input .modf")->required();
  tr->add_option("--epochs", ta.epochs, "Total epochs")->capture_default_str()->check(CLI::PositiveNumber);
  tr->add_option("--batch", ta.batch, "Mini-batch size")->capture_default_str()->check(CLI::PositiveNumber);
  tr->add_option("--lr", ta.lr, "Learning rate")->capture_default_str();
  tr->add_option("--momentum", ta.momentum, "SGD momentum")->capture_default_str();
  tr->add_option("--seed", ta.seed, "Init/shuffle/dropout seed")->capture_default_str();
  tr->add_option("--precision", ta.precision, "f32 or f64")->capture_default_str();
  tr->add_option("--checkpoint-every", ta.checkpoint_every, "Epochs between last-checkpoint writes")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  tr->add_option("--out", ta.out, "Run directory (default: $IQSHIFT_OUT_DIR/run)");
  tr->add_option("--resume", ta.resume, "Continue from a checkpoint_last.modw");
  tr->add_flag("--quiet", ta.quiet, "No per-epoch log");

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  EvalArgs xa;
  auto* xe = app.add_subcommand("cross-eval", "Evaluate on a dataset from another profile, with aligned SNR axis");
  for (auto [cmd, args] : {std::pair{ev, &ea}, std::pair{xe, &xa}}) {
    cmd->add_option("--checkpoint", args->checkpoint, "Model checkpoint (.modw)")->required();
    cmd->add_option("--data", args->data, "Dataset (.modf)")->required();
    cmd->add_option("--split", args->split, "train, val or test")->capture_default_str();
    cmd->add_option("--model-id", args->model_id, "Model label in the report");
    cmd->add_option("--dataset-id", args->dataset_id, "Dataset label in the report");
    cmd->add_option("--batch", args->batch, "Inference batch size")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--out", args->out, "Report JSON (default under $IQSHIFT_OUT_DIR)");
  }
  xe->add_option("--trained-on", xa.trained_on, "Training profile (A, B, profile file or .modf); default: from checkpoint");

  ReportArgs ra;
  auto* rep = app.add_subcommand("report", "Flatten a report into TSV tables");
  rep->add_option("--in", ra.in, "Report JSON")->required();
  rep->add_option("--out-dir", ra.out_dir, "Directory for TSV tables (default: $IQSHIFT_OUT_DIR)");
  rep->add_option("--threshold", ra.threshold, "Recall threshold for retained classes")->capture_default_str();

  std::string suite = "all";
  auto* st = app.add_subcommand("selftest", "Gradient-check and DSP property suites");
  st->add_option("--suite", suite, "all, gradient or dsp")
      ->capture_default_str()
      ->check(CLI::IsMember({"all", "gradient", "dsp"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kUsage);
  }

  try {
    if (g.worker_count() > 0) omp_set_num_threads(g.worker_count());
    if (*gen) return run_generate(ga, g);
    if (*tr) return run_train(ta, g);
    if (*ev) return run_eval(ea, g, false);
    if (*xe) return run_eval(xa, g, true);
    if (*rep) return run_report(ra);
    if (*st) return run_selftest(suite);
  } catch (const UsageError& e) {
    return fail("usage", e.what(), kUsage);
  } catch (const DataError& e) {
    return fail("data", std::string(to_string(e.kind())) + ": " + e.what(), kData);
  } catch (const std::invalid_argument& e) {
    return fail("usage", e.what(), kUsage);
  } catch (const std::exception& e) {
    return fail("data", e.what(), kData);
  }
  return kUsage;
}
