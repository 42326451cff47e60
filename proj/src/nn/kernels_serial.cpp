// SPDX-License-Identifier: Apache-2.0
// Straightforward loop kernels. They define the reference results the
// parallel kernels are tested against.
#include <cmath>

#include "iqshift/nn/kernels.hpp"
#include "shape_checks.hpp"

namespace iqshift::nn::serial {

template <typename T>
void conv1d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y) {
  detail::check_conv(x, w, b);
  const std::size_t n = x.dim(0), cin = x.dim(1), len = x.dim(2), cout = w.dim(0), k = w.dim(2);
  const long pad = static_cast<long>(k / 2);
  detail::ensure_shape(y, {n, cout, len});
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t t = 0; t < len; ++t) {
        T acc = b[co];
        for (std::size_t ci = 0; ci < cin; ++ci)
          for (std::size_t j = 0; j < k; ++j) {
            const long src = static_cast<long>(t) + static_cast<long>(j) - pad;
            if (src < 0 || src >= static_cast<long>(len)) continue;
            acc += w[(co * cin + ci) * k + j] * x[(s * cin + ci) * len + static_cast<std::size_t>(src)];
          }
        y[(s * cout + co) * len + t] = acc;
      }
}

template <typename T>
void conv1d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>& dx, Tensor<T>& dw,
                     Tensor<T>& db) {
  const std::size_t n = x.dim(0), cin = x.dim(1), len = x.dim(2), cout = w.dim(0), k = w.dim(2);
  const long pad = static_cast<long>(k / 2);
  if (dy.shape() != Shape{n, cout, len}) throw std::invalid_argument("conv1d backward: upstream gradient shape");
  detail::ensure_shape(dx, x.shape());
  detail::ensure_shape(dw, w.shape());
  detail::ensure_shape(db, {cout});
  dx.fill(T{});
  dw.fill(T{});
  db.fill(T{});
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t t = 0; t < len; ++t) {
        const T g = dy[(s * cout + co) * len + t];
        db[co] += g;
        for (std::size_t ci = 0; ci < cin; ++ci)
          for (std::size_t j = 0; j < k; ++j) {
            const long src = static_cast<long>(t) + static_cast<long>(j) - pad;
            if (src < 0 || src >= static_cast<long>(len)) continue;
            const std::size_t xi = (s * cin + ci) * len + static_cast<std::size_t>(src);
            dw[(co * cin + ci) * k + j] += g * x[xi];
            dx[xi] += g * w[(co * cin + ci) * k + j];
          }
      }
}

template <typename T>
void dense_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y) {
  detail::check_dense(x, w, b);
  const std::size_t n = x.dim(0), f = w.dim(1), m = w.dim(0);
  detail::ensure_shape(y, {n, m});
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t o = 0; o < m; ++o) {
      T acc = b[o];
      for (std::size_t i = 0; i < f; ++i) acc += w[o * f + i] * x[s * f + i];
      y[s * m + o] = acc;
    }
}

template <typename T>
void dense_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>& dx, Tensor<T>& dw,
                    Tensor<T>& db) {
  const std::size_t n = x.dim(0), f = w.dim(1), m = w.dim(0);
  if (dy.shape() != Shape{n, m}) throw std::invalid_argument("dense backward: upstream gradient shape");
  detail::ensure_shape(dx, x.shape());
  detail::ensure_shape(dw, w.shape());
  detail::ensure_shape(db, {m});
  dx.fill(T{});
  dw.fill(T{});
  db.fill(T{});
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t o = 0; o < m; ++o) {
      const T g = dy[s * m + o];
      db[o] += g;
      for (std::size_t i = 0; i < f; ++i) {
        dw[o * f + i] += g * x[s * f + i];
        dx[s * f + i] += g * w[o * f + i];
      }
    }
}

template <typename T>
void batchnorm_train_forward(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, double eps,
                             Tensor<T>& y, Tensor<T>& xhat, std::vector<double>& mean, std::vector<double>& var) {
  detail::check_bn(x, gamma, beta);
  const std::size_t n = x.dim(0), c = x.dim(1), len = x.dim(2);
  const double count = static_cast<double>(n * len);
  detail::ensure_shape(y, x.shape());
  detail::ensure_shape(xhat, x.shape());
  mean.assign(c, 0.0);
  var.assign(c, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double sum = 0.0;
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t t = 0; t < len; ++t) sum += static_cast<double>(x[(s * c + ch) * len + t]);
    const double mu = sum / count;
    double sq = 0.0;
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t t = 0; t < len; ++t) {
        const double d = static_cast<double>(x[(s * c + ch) * len + t]) - mu;
        sq += d * d;
      }
    mean[ch] = mu;
    var[ch] = sq / count;
    const double inv = 1.0 / std::sqrt(var[ch] + eps);
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t t = 0; t < len; ++t) {
        const std::size_t i = (s * c + ch) * len + t;
        const T h = static_cast<T>((static_cast<double>(x[i]) - mu) * inv);
        xhat[i] = h;
        y[i] = gamma[ch] * h + beta[ch];
      }
  }
}

template <typename T>
void batchnorm_train_backward(const Tensor<T>& dy, const Tensor<T>& xhat, const Tensor<T>& gamma,
                              const std::vector<double>& var, double eps, Tensor<T>& dx, Tensor<T>& dgamma,
                              Tensor<T>& dbeta) {
  const std::size_t n = xhat.dim(0), c = xhat.dim(1), len = xhat.dim(2);
  if (dy.shape() != xhat.shape()) throw std::invalid_argument("batch norm backward: upstream gradient shape");
  const double count = static_cast<double>(n * len);
  detail::ensure_shape(dx, xhat.shape());
  detail::ensure_shape(dgamma, {c});
  detail::ensure_shape(dbeta, {c});
  for (std::size_t ch = 0; ch < c; ++ch) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t t = 0; t < len; ++t) {
        const std::size_t i = (s * c + ch) * len + t;
        sum_dy += static_cast<double>(dy[i]);
        sum_dy_xhat += static_cast<double>(dy[i]) * static_cast<double>(xhat[i]);
      }
    dbeta[ch] = static_cast<T>(sum_dy);
    dgamma[ch] = static_cast<T>(sum_dy_xhat);
    const double scale = static_cast<double>(gamma[ch]) / std::sqrt(var[ch] + eps) / count;
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t t = 0; t < len; ++t) {
        const std::size_t i = (s * c + ch) * len + t;
        dx[i] = static_cast<T>(scale * (count * static_cast<double>(dy[i]) - sum_dy -
                                        static_cast<double>(xhat[i]) * sum_dy_xhat));
      }
  }
}

#define IQSHIFT_INSTANTIATE(T)                                                                                     \
  template void conv1d_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&);             \
  template void conv1d_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&, Tensor<T>&, \
                                   Tensor<T>&);                                                                  \
  template void dense_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&);              \
  template void dense_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&, Tensor<T>&,  \
                                  Tensor<T>&);                                                                   \
  template void batchnorm_train_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, double,         \
                                           Tensor<T>&, Tensor<T>&, std::vector<double>&, std::vector<double>&);  \
  template void batchnorm_train_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,                \
                                            const std::vector<double>&, double, Tensor<T>&, Tensor<T>&,          \
                                            Tensor<T>&);

IQSHIFT_INSTANTIATE(float)
IQSHIFT_INSTANTIATE(double)
#undef IQSHIFT_INSTANTIATE

}  // namespace iqshift::nn::serial
