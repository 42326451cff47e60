// SPDX-License-Identifier: Apache-2.0
#include "iqshift/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "iqshift/common/binary_io.hpp"
#include "iqshift/common/config.hpp"
#include "iqshift/common/error.hpp"
#include "iqshift/common/rng.hpp"
#include "iqshift/nn/loss.hpp"
#include "iqshift/nn/sgdm.hpp"

namespace iqshift::train {

namespace fs = std::filesystem;
using datastore::Dataset;
using datastore::Split;

namespace {

constexpr std::uint64_t kInitKey = 1;
constexpr std::uint64_t kShuffleKey = 2;
constexpr std::uint64_t kDropoutKey = 3;

std::string format_record(const EpochRecord& r) {
  return std::to_string(r.epoch) + "\t" + format_double(r.train_loss) + "\t" + format_double(r.val_loss) + "\t" +
         format_double(r.val_accuracy) + "\t" + format_double(r.seconds);
}

EpochRecord parse_record(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, '\t');) f.push_back(trim(cell));
  if (f.size() != 5) throw DataError(DataError::Kind::structure, "history row needs 5 columns: '" + line + "'");
  try {
    return EpochRecord{std::stoull(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4])};
  } catch (const std::logic_error&) {
    throw DataError(DataError::Kind::structure, "history row is not numeric: '" + line + "'");
  }
}

void emit(const TrainConfig& cfg, const std::string& msg) {
  if (cfg.log) cfg.log(msg);
}

/// Everything a run needs besides the network itself.
template <typename T>
struct Session {
  Model& model;
  nn::Network<T>& net;
  nn::Sgdm<T>& opt;
  TrainHistory& history;
  nn::Checkpoint& best;
  const Dataset& data;
  const TrainConfig& cfg;
  std::vector<int> labels;  // class enum value -> model index

  std::string metadata(std::size_t epoch) const {
    std::string m = model.identity_metadata();
    m += "epoch = " + std::to_string(epoch) + "\n";
    m += "seed = " + std::to_string(cfg.seed) + "\n";
    m += "batch_size = " + std::to_string(cfg.batch_size) + "\n";
    m += "precision_mode = " + to_string(cfg.precision) + "\n";
    std::stringstream profile(siggen::format_profile(data.manifest.profile));
    for (std::string line; std::getline(profile, line);)
      if (line.find('=') != std::string::npos) m += "data." + trim(line) + "\n";
    for (const auto& r : history.epochs) {
      std::string row = format_record(r);
      std::replace(row.begin(), row.end(), '\t', ',');
      m += "history." + std::to_string(r.epoch) + " = " + row + "\n";
    }
    return m;
  }

  std::vector<int> batch_labels(std::span<const std::size_t> idx) const {
    std::vector<int> y(idx.size());
    for (std::size_t b = 0; b < idx.size(); ++b) y[b] = labels[static_cast<int>(data.frames[idx[b]].meta.cls)];
    return y;
  }

  /// Validation loss and accuracy in inference mode; touches no state.
  std::pair<double, double> validate_split() {
    const auto val = data.indices(Split::val);
    nn::ExecContext ctx;
    ctx.mode = nn::Mode::infer;
    ctx.threads = cfg.threads;
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t s = 0; s < val.size(); s += cfg.batch_size) {
      const std::span<const std::size_t> idx(val.data() + s, std::min(cfg.batch_size, val.size() - s));
      const auto y = batch_labels(idx);
      const nn::Tensor<T> logits = net.forward(assemble_batch<T>(data, idx), ctx);
      loss_sum += nn::softmax_xent(logits, y).loss * static_cast<double>(idx.size());
      const std::size_t c = logits.dim(1);
      for (std::size_t b = 0; b < idx.size(); ++b) {
        const T* row = logits.data() + b * c;
        if (std::max_element(row, row + c) - row == y[b]) ++correct;
      }
    }
    const double n = static_cast<double>(val.size());
    return {loss_sum / n, static_cast<double>(correct) / n};
  }

  void run_epoch(std::size_t epoch) {  // 1-based
    const auto t0 = std::chrono::steady_clock::now();
    const auto order = epoch_order(data, cfg.seed, epoch);
    const std::size_t steps = batches_per_epoch(order.size(), cfg.batch_size);
    nn::ExecContext ctx;
    ctx.mode = nn::Mode::train;
    ctx.threads = cfg.threads;
    ctx.dropout_seed = derive_seed(cfg.seed, {kDropoutKey});
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < steps; ++b) {
      const std::size_t first = b * cfg.batch_size;
      const std::span<const std::size_t> idx(order.data() + first, std::min(cfg.batch_size, order.size() - first));
      ctx.step = (epoch - 1) * steps + b;
      const nn::Tensor<T> logits = net.forward(assemble_batch<T>(data, idx), ctx);
      auto lr = nn::softmax_xent(logits, batch_labels(idx));
      if (!std::isfinite(lr.loss))
        throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) + " step " +
                                 std::to_string(b));
      loss_sum += lr.loss * static_cast<double>(idx.size());
      net.backward(lr.grad, ctx);
      opt.step(net.params());
    }
    const auto [val_loss, val_acc] = validate_split();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool improved = history.epochs.empty() || val_acc > history.epochs[history.best_epoch() - 1].val_accuracy;
    history.epochs.push_back({epoch, loss_sum / static_cast<double>(order.size()), val_loss, val_acc, secs});

    std::ostringstream msg;
    msg << "epoch " << epoch << "/" << cfg.epochs << " train_loss " << history.epochs.back().train_loss
        << " val_loss " << val_loss << " val_acc " << val_acc << " (" << secs << " s)";
    emit(cfg, msg.str());

    const std::string meta = metadata(epoch);
    if (improved) best = nn::capture<T>(net, &opt, meta);
    if (!cfg.out_dir.empty()) {
      const fs::path dir(cfg.out_dir);
      if (improved) nn::write_checkpoint(best, (dir / "checkpoint_best.modw").string());
      if (epoch % cfg.checkpoint_every == 0 || epoch == cfg.epochs)
        nn::write_checkpoint(nn::capture<T>(net, &opt, meta), (dir / "checkpoint_last.modw").string());
      write_text_file((dir / "history.tsv").string(), history.to_tsv());
    }
  }
};

template <typename T>
nn::Network<T>& network_of(Model& m) {
  if constexpr (std::is_same_v<T, float>)
    return m.f32();
  else
    return m.f64();
}

template <typename T>
TrainResult run(Model model, std::optional<nn::Checkpoint> resume_from, TrainHistory history,
                std::optional<nn::Checkpoint> best_in, const Dataset& data, const TrainConfig& cfg) {
  nn::Network<T>& net = network_of<T>(model);
  nn::Sgdm<T> opt({cfg.learning_rate, cfg.momentum});
  if (resume_from) nn::restore<T>(*resume_from, net, &opt);
  nn::Checkpoint best = best_in ? std::move(*best_in) : nn::Checkpoint{};
  Session<T> s{model, net, opt, history, best, data, cfg, label_map(data.manifest, model.classes())};
  if (!cfg.out_dir.empty()) fs::create_directories(cfg.out_dir);
  for (std::size_t e = history.completed() + 1; e <= cfg.epochs; ++e) s.run_epoch(e);
  return TrainResult{std::move(model), std::move(best), std::move(history), ""};
}

void check_data(const Dataset& data) {
  if (data.manifest.splits.size() != data.frames.size())
    throw DataError(DataError::Kind::structure, "dataset is not partitioned into train/val/test");
  if (data.count(Split::train) == 0) throw DataError(DataError::Kind::structure, "dataset has no TRAIN frames");
  if (data.count(Split::val) == 0) throw DataError(DataError::Kind::structure, "dataset has no VAL frames");
}

}  // namespace

TrainConfig TrainConfig::reference() {
  TrainConfig c;
  c.precision = Precision::f64;
  c.threads = 1;
  return c;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (checkpoint_every < 1) throw std::invalid_argument("checkpoint cadence must be >= 1 epoch");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (threads < 0) throw std::invalid_argument("threads must be >= 0");
}

std::size_t TrainHistory::best_epoch() const {
  if (epochs.empty()) return 0;
  std::size_t best = 0;
  for (std::size_t i = 1; i < epochs.size(); ++i)
    if (epochs[i].val_accuracy > epochs[best].val_accuracy) best = i;
  return epochs[best].epoch;
}

std::vector<double> TrainHistory::train_losses() const {
  std::vector<double> out;
  for (const auto& r : epochs) out.push_back(r.train_loss);
  return out;
}

std::string TrainHistory::to_tsv() const {
  std::string out = "epoch\ttrain_loss\tval_loss\tval_accuracy\tseconds\n";
  for (const auto& r : epochs) out += format_record(r) + "\n";
  return out;
}

TrainHistory TrainHistory::from_tsv(const std::string& text) {
  TrainHistory h;
  std::stringstream ss(text);
  std::string line;
  bool header = true;
  while (std::getline(ss, line)) {
    if (trim(line).empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("epoch", 0) == 0) continue;
    }
    h.epochs.push_back(parse_record(line));
  }
  return h;
}

std::vector<std::size_t> epoch_order(const Dataset& data, std::uint64_t seed, std::size_t epoch) {
  auto order = data.indices(Split::train);
  Rng rng(derive_seed(seed, {kShuffleKey, epoch}));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

std::vector<int> label_map(const datastore::DatasetManifest& m, const std::vector<siggen::Modulation>& model_classes) {
  if (m.profile.classes.size() != model_classes.size())
    throw std::invalid_argument("dataset has " + std::to_string(m.profile.classes.size()) + " classes but the model outputs " +
                                std::to_string(model_classes.size()));
  std::vector<int> map(siggen::kAllModulations.size(), -1);
  for (auto c : m.profile.classes) {
    const auto it = std::find(model_classes.begin(), model_classes.end(), c);
    if (it == model_classes.end())
      throw std::invalid_argument("dataset class " + siggen::name(c) + " is not among the model's labels");
    map[static_cast<int>(c)] = static_cast<int>(it - model_classes.begin());
  }
  return map;
}

TrainResult train(const zoo::ModelGraph& graph, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  check_data(data);
  label_map(data.manifest, graph.classes);
  Model model(graph, cfg.precision, derive_seed(cfg.seed, {kInitKey}));
  model.threads = cfg.threads;
  model.batch_size = cfg.batch_size;
  if (cfg.precision == Precision::f32) return run<float>(std::move(model), std::nullopt, {}, std::nullopt, data, cfg);
  return run<double>(std::move(model), std::nullopt, {}, std::nullopt, data, cfg);
}

TrainResult resume(const std::string& checkpoint_path, const Dataset& data, const TrainConfig& cfg,
                   const zoo::ModelGraph* expected) {
  cfg.validate();
  nn::Checkpoint ckpt = nn::read_checkpoint(checkpoint_path);
  if (!ckpt.optimizer)
    throw DataError(DataError::Kind::mismatch, "checkpoint has no optimizer state and cannot be resumed");
  Model model = Model::from_checkpoint(ckpt);
  model.threads = cfg.threads;
  model.batch_size = cfg.batch_size;
  if (expected && (nn::spec_listing(expected->layers, expected->input_shape) != ckpt.spec_listing ||
                   expected->classes != model.classes()))
    throw DataError(DataError::Kind::mismatch, "checkpoint was written for a different model layout");
  if (model.precision() != cfg.precision)
    throw DataError(DataError::Kind::mismatch, "checkpoint precision " + to_string(model.precision()) +
                                                   " differs from the requested " + to_string(cfg.precision));

  const KeyValueConfig meta = KeyValueConfig::parse(ckpt.metadata);
  TrainHistory history;
  const std::size_t done = static_cast<std::size_t>(meta.get_int("epoch"));
  for (std::size_t e = 1; e <= done; ++e) {
    std::string row = meta.get("history." + std::to_string(e));
    std::replace(row.begin(), row.end(), ',', '\t');
    history.epochs.push_back(parse_record(row));
  }

  std::optional<nn::Checkpoint> best;
  const fs::path best_path = fs::path(checkpoint_path).parent_path() / "checkpoint_best.modw";
  if (fs::exists(best_path) && fs::path(checkpoint_path) != best_path)
    best = nn::read_checkpoint(best_path.string());
  else if (history.best_epoch() == done)
    best = ckpt;

  if (done >= cfg.epochs) {
    std::string notice = "checkpoint is already at epoch " + std::to_string(done) + " of " +
                         std::to_string(cfg.epochs) + "; nothing to train";
    emit(cfg, notice);
    return TrainResult{std::move(model), best ? std::move(*best) : ckpt, std::move(history), std::move(notice)};
  }
  check_data(data);
  label_map(data.manifest, model.classes());
  emit(cfg, "resuming after epoch " + std::to_string(done));
  if (cfg.precision == Precision::f32)
    return run<float>(std::move(model), std::move(ckpt), std::move(history), std::move(best), data, cfg);
  return run<double>(std::move(model), std::move(ckpt), std::move(history), std::move(best), data, cfg);
}

}  // namespace iqshift::train
