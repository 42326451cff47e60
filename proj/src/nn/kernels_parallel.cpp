// SPDX-License-Identifier: Apache-2.0
#include <omp.h>

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstring>

#include "iqshift/nn/kernels.hpp"
#include "shape_checks.hpp"

namespace iqshift::nn::parallel {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using ColVec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

int team(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

// cols(ci*K + j, t) = x(ci, t + j - pad), zero outside [0, L).
template <typename T>
void im2col(const T* x, std::size_t cin, std::size_t len, std::size_t k, RowMat<T>& cols) {
  const long pad = static_cast<long>(k / 2);
  const long L = static_cast<long>(len);
  for (std::size_t ci = 0; ci < cin; ++ci) {
    const T* row = x + ci * len;
    for (std::size_t j = 0; j < k; ++j) {
      T* dst = cols.data() + (ci * k + j) * len;
      const long shift = static_cast<long>(j) - pad;
      const long t0 = std::min(L, std::max(0L, -shift));
      const long t1 = std::max(t0, std::min(L, L - shift));
      std::fill(dst, dst + t0, T{});
      if (t1 > t0) std::memcpy(dst + t0, row + t0 + shift, static_cast<std::size_t>(t1 - t0) * sizeof(T));
      std::fill(dst + t1, dst + L, T{});
    }
  }
}

template <typename T>
void col2im(const RowMat<T>& dcols, std::size_t cin, std::size_t len, std::size_t k, T* dx) {
  const long pad = static_cast<long>(k / 2);
  const long L = static_cast<long>(len);
  for (std::size_t ci = 0; ci < cin; ++ci) {
    T* row = dx + ci * len;
    std::fill(row, row + len, T{});
    for (std::size_t j = 0; j < k; ++j) {
      const T* src = dcols.data() + (ci * k + j) * len;
      const long shift = static_cast<long>(j) - pad;
      const long t0 = std::max(0L, -shift);
      const long t1 = std::min(L, L - shift);
      for (long t = t0; t < t1; ++t) row[t + shift] += src[t];
    }
  }
}

}  // namespace

template <typename T>
void conv1d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y, int threads) {
  detail::check_conv(x, w, b);
  const std::size_t n = x.dim(0), cin = x.dim(1), len = x.dim(2), cout = w.dim(0), k = w.dim(2);
  detail::ensure_shape(y, {n, cout, len});
  const Eigen::Map<const RowMat<T>> W(w.data(), static_cast<long>(cout), static_cast<long>(cin * k));
  const Eigen::Map<const ColVec<T>> bias(b.data(), static_cast<long>(cout));
#pragma omp parallel num_threads(team(threads))
  {
    RowMat<T> cols(static_cast<long>(cin * k), static_cast<long>(len));
#pragma omp for schedule(static)
    for (long s = 0; s < static_cast<long>(n); ++s) {
      const auto su = static_cast<std::size_t>(s);
      im2col(x.data() + su * cin * len, cin, len, k, cols);
      Eigen::Map<RowMat<T>> Y(y.data() + su * cout * len, static_cast<long>(cout), static_cast<long>(len));
      Y.noalias() = W * cols;
      Y.colwise() += bias;
    }
  }
}

template <typename T>
void conv1d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>& dx, Tensor<T>& dw,
                     Tensor<T>& db, int threads) {
  const std::size_t n = x.dim(0), cin = x.dim(1), len = x.dim(2), cout = w.dim(0), k = w.dim(2);
  if (dy.shape() != Shape{n, cout, len}) throw std::invalid_argument("conv1d backward: upstream gradient shape");
  detail::ensure_shape(dx, x.shape());
  detail::ensure_shape(dw, w.shape());
  detail::ensure_shape(db, {cout});

  const auto rows = static_cast<long>(cout), inner = static_cast<long>(cin * k), cols_n = static_cast<long>(len);
  const Eigen::Map<const RowMat<T>> W(w.data(), rows, inner);
  const std::size_t nchunks = (n + kReduceChunk - 1) / kReduceChunk;
  std::vector<RowMat<T>> part_dw(nchunks);
  std::vector<ColVec<T>> part_db(nchunks);

#pragma omp parallel num_threads(team(threads))
  {
    RowMat<T> cols(inner, cols_n);
    RowMat<T> dcols(inner, cols_n);
#pragma omp for schedule(static)
    for (long c = 0; c < static_cast<long>(nchunks); ++c) {
      auto& pdw = part_dw[static_cast<std::size_t>(c)];
      auto& pdb = part_db[static_cast<std::size_t>(c)];
      pdw.setZero(rows, inner);
      pdb.setZero(rows);
      const std::size_t s0 = static_cast<std::size_t>(c) * kReduceChunk;
      const std::size_t s1 = std::min(n, s0 + kReduceChunk);
      for (std::size_t s = s0; s < s1; ++s) {
        im2col(x.data() + s * cin * len, cin, len, k, cols);
        const Eigen::Map<const RowMat<T>> DY(dy.data() + s * cout * len, rows, cols_n);
        pdw.noalias() += DY * cols.transpose();
        pdb += DY.rowwise().sum();
        dcols.noalias() = W.transpose() * DY;
        col2im(dcols, cin, len, k, dx.data() + s * cin * len);
      }
    }
  }

  Eigen::Map<RowMat<T>> DW(dw.data(), rows, inner);
  Eigen::Map<ColVec<T>> DB(db.data(), rows);
  DW.setZero();
  DB.setZero();
  for (std::size_t c = 0; c < nchunks; ++c) {
    DW += part_dw[c];
    DB += part_db[c];
  }
}

template <typename T>
void dense_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y, int /*threads*/) {
  detail::check_dense(x, w, b);
  const auto n = static_cast<long>(x.dim(0)), f = static_cast<long>(w.dim(1)), m = static_cast<long>(w.dim(0));
  detail::ensure_shape(y, {x.dim(0), w.dim(0)});
  const Eigen::Map<const RowMat<T>> X(x.data(), n, f);
  const Eigen::Map<const RowMat<T>> W(w.data(), m, f);
  const Eigen::Map<const RowVec<T>> bias(b.data(), m);
  Eigen::Map<RowMat<T>> Y(y.data(), n, m);
  Y.noalias() = X * W.transpose();
  Y.rowwise() += bias;
}

template <typename T>
void dense_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>& dx, Tensor<T>& dw,
                    Tensor<T>& db, int /*threads*/) {
  const auto n = static_cast<long>(x.dim(0)), f = static_cast<long>(w.dim(1)), m = static_cast<long>(w.dim(0));
  if (dy.shape() != Shape{x.dim(0), w.dim(0)}) throw std::invalid_argument("dense backward: upstream gradient shape");
  detail::ensure_shape(dx, x.shape());
  detail::ensure_shape(dw, w.shape());
  detail::ensure_shape(db, {w.dim(0)});
  const Eigen::Map<const RowMat<T>> X(x.data(), n, f);
  const Eigen::Map<const RowMat<T>> W(w.data(), m, f);
  const Eigen::Map<const RowMat<T>> DY(dy.data(), n, m);
  Eigen::Map<RowMat<T>>(dw.data(), m, f).noalias() = DY.transpose() * X;
  Eigen::Map<RowVec<T>>(db.data(), m) = DY.colwise().sum();
  Eigen::Map<RowMat<T>>(dx.data(), n, f).noalias() = DY * W;
}

template <typename T>
void batchnorm_train_forward(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, double eps,
                             Tensor<T>& y, Tensor<T>& xhat, std::vector<double>& mean, std::vector<double>& var,
                             int threads) {
  detail::check_bn(x, gamma, beta);
  const std::size_t n = x.dim(0), c = x.dim(1), len = x.dim(2);
  const double count = static_cast<double>(n * len);
  detail::ensure_shape(y, x.shape());
  detail::ensure_shape(xhat, x.shape());
  mean.assign(c, 0.0);
  var.assign(c, 0.0);
#pragma omp parallel for schedule(static) num_threads(team(threads))
  for (long chl = 0; chl < static_cast<long>(c); ++chl) {
    const auto ch = static_cast<std::size_t>(chl);
    double sum = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const T* row = x.data() + (s * c + ch) * len;
      for (std::size_t t = 0; t < len; ++t) sum += static_cast<double>(row[t]);
    }
    const double mu = sum / count;
    double sq = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const T* row = x.data() + (s * c + ch) * len;
      for (std::size_t t = 0; t < len; ++t) {
        const double d = static_cast<double>(row[t]) - mu;
        sq += d * d;
      }
    }
    mean[ch] = mu;
    var[ch] = sq / count;
    const double inv = 1.0 / std::sqrt(var[ch] + eps);
    const T g = gamma[ch], bb = beta[ch];
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t off = (s * c + ch) * len;
      for (std::size_t t = 0; t < len; ++t) {
        const T h = static_cast<T>((static_cast<double>(x[off + t]) - mu) * inv);
        xhat[off + t] = h;
        y[off + t] = g * h + bb;
      }
    }
  }
}

template <typename T>
void batchnorm_train_backward(const Tensor<T>& dy, const Tensor<T>& xhat, const Tensor<T>& gamma,
                              const std::vector<double>& var, double eps, Tensor<T>& dx, Tensor<T>& dgamma,
                              Tensor<T>& dbeta, int threads) {
  const std::size_t n = xhat.dim(0), c = xhat.dim(1), len = xhat.dim(2);
  if (dy.shape() != xhat.shape()) throw std::invalid_argument("batch norm backward: upstream gradient shape");
  const double count = static_cast<double>(n * len);
  detail::ensure_shape(dx, xhat.shape());
  detail::ensure_shape(dgamma, {c});
  detail::ensure_shape(dbeta, {c});
#pragma omp parallel for schedule(static) num_threads(team(threads))
  for (long chl = 0; chl < static_cast<long>(c); ++chl) {
    const auto ch = static_cast<std::size_t>(chl);
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t off = (s * c + ch) * len;
      for (std::size_t t = 0; t < len; ++t) {
        const double g = static_cast<double>(dy[off + t]);
        sum_dy += g;
        sum_dy_xhat += g * static_cast<double>(xhat[off + t]);
      }
    }
    dbeta[ch] = static_cast<T>(sum_dy);
    dgamma[ch] = static_cast<T>(sum_dy_xhat);
    const double scale = static_cast<double>(gamma[ch]) / std::sqrt(var[ch] + eps) / count;
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t off = (s * c + ch) * len;
      for (std::size_t t = 0; t < len; ++t)
        dx[off + t] = static_cast<T>(scale * (count * static_cast<double>(dy[off + t]) - sum_dy -
                                              static_cast<double>(xhat[off + t]) * sum_dy_xhat));
    }
  }
}

#define IQSHIFT_INSTANTIATE(T)                                                                                     \
  template void conv1d_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&, int);        \
  template void conv1d_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&, Tensor<T>&, \
                                   Tensor<T>&, int);                                                             \
  template void dense_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&, int);         \
  template void dense_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&, Tensor<T>&,  \
                                  Tensor<T>&, int);                                                              \
  template void batchnorm_train_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, double,         \
                                           Tensor<T>&, Tensor<T>&, std::vector<double>&, std::vector<double>&,   \
                                           int);                                                                 \
  template void batchnorm_train_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,                \
                                            const std::vector<double>&, double, Tensor<T>&, Tensor<T>&,          \
                                            Tensor<T>&, int);

IQSHIFT_INSTANTIATE(float)
IQSHIFT_INSTANTIATE(double)
#undef IQSHIFT_INSTANTIATE

}  // namespace iqshift::nn::parallel
