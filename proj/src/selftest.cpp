// SPDX-License-Identifier: Apache-2.0
#include "iqshift/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unsupported/Eigen/FFT>

#include "iqshift/common/rng.hpp"
#include "iqshift/datastore/frame.hpp"
#include "iqshift/nn/layers.hpp"
#include "iqshift/nn/loss.hpp"
#include "iqshift/nn/network.hpp"
#include "iqshift/siggen/modulation.hpp"
#include "iqshift/siggen/srrc.hpp"
#include "iqshift/siggen/synth.hpp"

namespace iqshift::selftest {

using nn::ExecContext;
using nn::KernelPath;
using nn::LayerSpec;
using nn::Shape;
using nn::Tensor;

namespace {

using Vec = std::vector<double>;

Vec flat(const Tensor<double>& t) { return Vec(t.values().begin(), t.values().end()); }

double rel_error(const Vec& a, const Vec& n) {
  double diff = 0.0, na = 0.0, nn_ = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - n[i]) * (a[i] - n[i]);
    na += a[i] * a[i];
    nn_ += n[i] * n[i];
  }
  // Floor keeps identically-zero gradients (a bias feeding batch norm) from
  // turning finite-difference noise into a relative error of 1.
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn_), 1e-3});
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(hi - lo + 1));
}

Tensor<double> random_tensor(const Shape& s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor<double> t(s);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = uniform(rng, lo, hi);
  return t;
}

/// Moves values away from 0 so no element sits on a ReLU kink.
void avoid_zero(Tensor<double>& t, double margin) {
  for (std::size_t i = 0; i < t.size(); ++i)
    if (std::abs(t[i]) < margin) t[i] = t[i] < 0 ? t[i] - margin : t[i] + margin;
}

struct Worst {
  double value = 0.0;
  std::string where;

  void update(double v, const std::string& name) {
    if (v > value || where.empty()) {
      value = v;
      where = name;
    }
  }
  void update(const Worst& o, const std::string& prefix) { update(o.value, prefix + o.where); }
};

double dot(const Tensor<double>& a, const Tensor<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Loss <w, f(x)> for a layer; checks d/dx and d/dparams.
Worst check_layer(nn::Layer<double>& layer, Tensor<double> x, const ExecContext& ctx, Rng& rng, double h) {
  const Tensor<double> y = layer.forward(x, ctx);
  const Tensor<double> w = random_tensor(y.shape(), rng);
  const Tensor<double> dx = layer.backward(w, ctx);
  std::vector<nn::Param<double>*> params;
  layer.collect_params(params);
  std::vector<Vec> analytic;
  for (auto* p : params) analytic.push_back(flat(p->grad));

  auto loss = [&] { return dot(w, layer.forward(x, ctx)); };
  Worst worst;
  Vec num(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = loss();
    x[i] = keep - h;
    const double down = loss();
    x[i] = keep;
    num[i] = (up - down) / (2 * h);
  }
  worst.update(rel_error(flat(dx), num), "input");
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& v = params[k]->value;
    Vec pn(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double keep = v[i];
      v[i] = keep + h;
      const double up = loss();
      v[i] = keep - h;
      const double down = loss();
      v[i] = keep;
      pn[i] = (up - down) / (2 * h);
    }
    worst.update(rel_error(analytic[k], pn), params[k]->name);
  }
  return worst;
}

void randomize_params(nn::Layer<double>& layer, Rng& rng) {
  std::vector<nn::Param<double>*> params;
  layer.collect_params(params);
  for (auto* p : params) {
    const bool scale = p->name.ends_with("gamma");
    for (std::size_t i = 0; i < p->value.size(); ++i)
      p->value[i] = scale ? uniform(rng, 0.5, 1.5) : uniform(rng, -0.5, 0.5);
  }
}

struct Instance {
  LayerSpec spec;
  Shape per_sample;
  std::size_t batch;
  double kink_margin = 0.0;  // keep inputs this far from 0 (ReLU)
};

Instance make_instance(nn::LayerKind kind, Rng& rng) {
  const std::size_t n = pick(rng, 2, 3);
  const std::size_t c = pick(rng, 1, 3);
  const std::size_t l = 2 * pick(rng, 2, 5);
  switch (kind) {
    case nn::LayerKind::conv1d: {
      const std::size_t k = 2 * pick(rng, 0, 3) + 1;
      return {LayerSpec::conv(pick(rng, 1, 3), k), {c, l}, n};
    }
    case nn::LayerKind::batch_norm: return {LayerSpec::batch_norm(), {c, l}, n};
    case nn::LayerKind::relu: return {LayerSpec::relu(), {c, l}, n, 1e-3};
    case nn::LayerKind::selu: return {LayerSpec::selu(), {c, l}, n};
    case nn::LayerKind::dropout: return {LayerSpec::dropout(uniform(rng, 0.1, 0.6)), {c, l}, n};
    case nn::LayerKind::max_pool: return {LayerSpec::max_pool(), {c, l}, n};
    case nn::LayerKind::global_avg_pool: return {LayerSpec::global_avg_pool(), {c, l}, n};
    case nn::LayerKind::dense: return {LayerSpec::dense(pick(rng, 1, 4)), {c, l}, n};
    case nn::LayerKind::residual:
      return {LayerSpec::residual({LayerSpec::conv(c, 3), LayerSpec::batch_norm(), LayerSpec::relu()}), {c, l}, n};
    case nn::LayerKind::softmax: break;
  }
  throw std::logic_error("no gradient instance for this layer kind");
}

/// Keeps max-pool windows free of near ties.
void separate_pairs(Tensor<double>& t) {
  for (std::size_t i = 0; i + 1 < t.size(); i += 2)
    if (std::abs(t[i] - t[i + 1]) < 1e-2) t[i + 1] = t[i] + (t[i + 1] >= t[i] ? 0.05 : -0.05);
}

double check_loss(Rng& rng, double h) {
  const std::size_t n = pick(rng, 1, 4), c = pick(rng, 2, 6);
  Tensor<double> z = random_tensor({n, c}, rng, -3.0, 3.0);
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(pick(rng, 0, c - 1));
  const auto r = nn::softmax_xent(z, y);
  Vec num(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double keep = z[i];
    z[i] = keep + h;
    const double up = nn::softmax_xent(z, y).loss;
    z[i] = keep - h;
    const double down = nn::softmax_xent(z, y).loss;
    z[i] = keep;
    num[i] = (up - down) / (2 * h);
  }
  return rel_error(flat(r.grad), num);
}

Worst check_network(Rng& rng, KernelPath path, double h, std::uint64_t seed) {
  const std::size_t c = pick(rng, 1, 2), l = 16, n = pick(rng, 2, 3), classes = pick(rng, 2, 4);
  std::vector<LayerSpec> specs = {LayerSpec::conv(3, 5),
                                  LayerSpec::batch_norm(),
                                  LayerSpec::relu(),
                                  LayerSpec::max_pool(),
                                  LayerSpec::residual({LayerSpec::conv(3, 3), LayerSpec::batch_norm(), LayerSpec::relu()}),
                                  LayerSpec::global_avg_pool(),
                                  LayerSpec::dropout(0.25),
                                  LayerSpec::dense(4),
                                  LayerSpec::selu(),
                                  LayerSpec::dense(classes),
                                  LayerSpec::softmax()};
  nn::Network<double> net(specs, {c, l}, seed);
  for (auto* p : net.params())
    for (std::size_t i = 0; i < p->value.size(); ++i)
      if (!p->name.ends_with("gamma")) p->value[i] += uniform(rng, -0.1, 0.1);
  ExecContext ctx;
  ctx.mode = nn::Mode::train;
  ctx.kernels = path;
  ctx.threads = 1;
  ctx.dropout_seed = seed;
  Tensor<double> x = random_tensor({n, c, l}, rng);
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(pick(rng, 0, classes - 1));

  auto r = nn::softmax_xent(net.forward(x, ctx), y);
  const Tensor<double> dx = net.backward(r.grad, ctx);
  const auto params = net.params();
  std::vector<Vec> analytic;
  for (auto* p : params) analytic.push_back(flat(p->grad));
  auto loss = [&] { return nn::softmax_xent(net.forward(x, ctx), y).loss; };
  auto numeric = [&](Tensor<double>& t) {
    Vec g(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double keep = t[i];
      t[i] = keep + h;
      const double up = loss();
      t[i] = keep - h;
      const double down = loss();
      t[i] = keep;
      g[i] = (up - down) / (2 * h);
    }
    return g;
  };
  Worst worst;
  worst.update(rel_error(flat(dx), numeric(x)), "input");
  for (std::size_t k = 0; k < params.size(); ++k) worst.update(rel_error(analytic[k], numeric(params[k]->value)), params[k]->name);
  return worst;
}

CheckResult result(std::string suite, std::string name, double value, double limit, std::string detail = "") {
  return {std::move(suite), std::move(name), value < limit, value, limit, std::move(detail)};
}

std::string path_name(KernelPath p) { return p == KernelPath::serial ? "serial" : "parallel"; }

}  // namespace

std::vector<CheckResult> gradient_suite(const GradientOptions& opts) {
  std::vector<CheckResult> out;
  const nn::LayerKind kinds[] = {nn::LayerKind::conv1d,  nn::LayerKind::batch_norm,      nn::LayerKind::relu,
                                 nn::LayerKind::selu,    nn::LayerKind::dropout,         nn::LayerKind::max_pool,
                                 nn::LayerKind::dense,   nn::LayerKind::global_avg_pool, nn::LayerKind::residual};
  for (KernelPath path : {KernelPath::parallel, KernelPath::serial}) {
    for (auto kind : kinds) {
      Rng rng(derive_seed(opts.seed, {static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(path)}));
      Worst worst;
      for (std::size_t i = 0; i < opts.instances; ++i) {
        Instance inst = make_instance(kind, rng);
        std::uint64_t ordinal = 0;
        auto layer = nn::make_layer<double>(inst.spec, inst.per_sample, ordinal, derive_seed(opts.seed, {i}));
        randomize_params(*layer, rng);
        Shape full{inst.batch};
        full.insert(full.end(), inst.per_sample.begin(), inst.per_sample.end());
        Tensor<double> x = random_tensor(full, rng);
        if (inst.kink_margin > 0) avoid_zero(x, inst.kink_margin);
        if (kind == nn::LayerKind::max_pool) separate_pairs(x);
        ExecContext ctx;
        ctx.mode = nn::Mode::train;
        ctx.kernels = path;
        ctx.threads = 1;
        ctx.dropout_seed = derive_seed(opts.seed, {99, i});
        ctx.step = i;
        worst.update(check_layer(*layer, x, ctx, rng, opts.step), "#" + std::to_string(i) + " ");
      }
      out.push_back(result("gradient", nn::kind_name(kind) + "[" + path_name(path) + "]", worst.value, opts.tolerance,
                           std::to_string(opts.instances) + " instances, worst " + worst.where));
    }
    Rng rng(derive_seed(opts.seed, {1000, static_cast<std::uint64_t>(path)}));
    Worst worst;
    for (std::size_t i = 0; i < opts.instances; ++i)
      worst.update(check_network(rng, path, opts.step, derive_seed(opts.seed, {2000, i})), "#" + std::to_string(i) + " ");
    out.push_back(result("gradient", "network[" + path_name(path) + "]", worst.value, opts.tolerance,
                         std::to_string(opts.instances) + " instances, worst " + worst.where));
  }
  Rng rng(derive_seed(opts.seed, {3000}));
  double worst = 0.0;
  for (std::size_t i = 0; i < opts.instances; ++i) worst = std::max(worst, check_loss(rng, opts.step));
  out.push_back(result("gradient", "softmax_xent", worst, opts.tolerance, std::to_string(opts.instances) + " instances"));
  return out;
}

std::vector<CheckResult> dsp_suite(std::uint64_t seed) {
  using namespace siggen;
  std::vector<CheckResult> out;

  for (double beta : {0.2, 0.35, 0.5}) {
    for (int sps : {8, 10, 12}) {
      const auto g = srrc_taps(beta, sps);
      Vec r(2 * g.size() - 1, 0.0);
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j) r[i + j] += g[i] * g[j];
      const std::size_t c = g.size() - 1;
      double isi = 0.0;
      for (int m = 1; m < kDefaultSrrcSpan; ++m) {
        isi = std::max(isi, std::abs(r[c + static_cast<std::size_t>(m * sps)]));
        isi = std::max(isi, std::abs(r[c - static_cast<std::size_t>(m * sps)]));
      }
      std::ostringstream name;
      name << "srrc_isi(rolloff=" << beta << ",sps=" << sps << ")";
      out.push_back(result("dsp", name.str(), isi, 1e-3, "center " + std::to_string(r[c])));
    }
  }

  for (auto m : kAllModulations) {
    double e = 0.0;
    for (const auto& s : constellation(m)) e += std::norm(s);
    e /= static_cast<double>(constellation(m).size());
    out.push_back(result("dsp", "constellation_energy(" + name(m) + ")", std::abs(e - 1.0), 1e-12));
  }

  // SNR calibration: measure the realized noise against the clean signal.
  constexpr std::size_t kLen = 1 << 16;
  Eigen::FFT<double> fft;
  for (auto conv : {SnrConvention::total, SnrConvention::inband}) {
    for (double snr : {-10.0, 0.0, 10.0, 20.0}) {
      Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(conv), static_cast<std::uint64_t>(snr + 100)}));
      FrameMeta meta;
      meta.cls = Modulation::qpsk;
      meta.rolloff = conv == SnrConvention::total ? 0.35f : 0.25f;
      meta.sps = conv == SnrConvention::total ? 8 : 10;
      meta.power_scale_db = 1.5f;
      const Samples clean = synthesize_clean(meta, min_symbols(kLen, meta.sps, kDefaultSrrcSpan), kLen, rng);
      const Samples noisy = add_noise(clean, snr, conv, meta.rolloff, meta.sps, rng);
      std::vector<std::complex<double>> noise(kLen);
      for (std::size_t i = 0; i < kLen; ++i) noise[i] = noisy[i] - clean[i];
      double pn = mean_power(noise);
      if (conv == SnrConvention::inband) {
        std::vector<std::complex<double>> spec;
        fft.fwd(spec, noise);
        const double edge = (1.0 + meta.rolloff) / (2.0 * meta.sps);
        double in = 0.0;
        for (std::size_t k = 0; k < kLen; ++k) {
          const double f = k < kLen / 2 ? static_cast<double>(k) / kLen : static_cast<double>(k) / kLen - 1.0;
          if (std::abs(f) <= edge) in += std::norm(spec[k]);
        }
        pn = in / (static_cast<double>(kLen) * kLen);
      }
      const double measured = 10.0 * std::log10(mean_power(clean) / pn);
      std::ostringstream name;
      name << "snr_calibration(" << to_string(conv) << "," << snr << "dB)";
      out.push_back(result("dsp", name.str(), std::abs(measured - snr), 0.3, "measured " + std::to_string(measured)));
    }
  }

  const auto b = default_profile_b();
  const double offset = snr_offset_estimate(b);
  out.push_back(result("dsp", "profile_b_offset_vs_8dB", std::abs(offset - 8.0), 1.5, "offset " + std::to_string(offset)));
  {
    Rng rng(derive_seed(seed, {4242}));
    double sum = 0.0;
    constexpr int kDraws = 200000;
    for (int i = 0; i < kDraws; ++i) {
      const FrameMeta m = draw_frame_meta(b, Modulation::bpsk, 0.0, 0, rng);
      sum += inband_total_offset_db(m.rolloff, m.sps);
    }
    out.push_back(result("dsp", "profile_b_offset_monte_carlo", std::abs(sum / kDraws - offset), 0.02,
                         "mean " + std::to_string(sum / kDraws)));
  }

  {
    Samples x(64, Complex(1.0, 0.0));
    apply_cfo(x, 0.01);
    double err = 0.0;
    for (std::size_t n = 1; n < x.size(); ++n)
      err = std::max(err, std::abs(std::arg(x[n] / x[n - 1]) - 2 * std::numbers::pi * 0.01));
    out.push_back(result("dsp", "cfo_phase_step", err, 1e-12));
  }

  {
    const auto [meta, sig] = synthesize_signal(b, Modulation::qam16, 6.0, derive_seed(seed, {5}));
    const auto frames = datastore::slice_long_signal(sig, meta);
    out.push_back(result("dsp", "long_signal_slices", std::abs(static_cast<double>(frames.size()) - 32.0), 0.5,
                         std::to_string(frames.size()) + " frames"));
    double worst = 0.0;
    for (const auto& f : frames) worst = std::max(worst, std::abs(datastore::frame_power(datastore::normalize_unit_power(f)) - 1.0));
    out.push_back(result("dsp", "unit_power_f32", worst, 1e-9));
    Vec d(2 * kFrameLen);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = frames[0].iq[i] * 3.7;
    datastore::normalize_unit_power(d);
    out.push_back(result("dsp", "unit_power_f64", std::abs(datastore::frame_power(d) - 1.0), 1e-9));
  }
  return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

std::string format_results(const std::vector<CheckResult>& results) {
  std::ostringstream out;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.suite << "/" << r.name << " value=" << r.value << " limit=" << r.limit;
    if (!r.detail.empty()) out << " " << r.detail;
    out << "\n";
  }
  return out.str();
}

}  // namespace iqshift::selftest
