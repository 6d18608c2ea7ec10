#pragma once

#include "wornet/rng.hpp"
#include "wornet/tape.hpp"
#include "wornet/tensor.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

namespace wornet {

enum class RunMode { train, eval };

namespace detail {
template <typename S>
using MatRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using MapRM = Eigen::Map<MatRM<S>>;
template <typename S>
using CMapRM = Eigen::Map<const MatRM<S>>;

inline int conv_out_extent(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

/// Patch matrix for the whole batch: rows index (c, ki, kj), columns index
/// (n, oh, ow). Out-of-image taps are zero.
template <typename S>
MatRM<S> im2col(const Tensor<S>& x, int kh, int kw, int stride, int pad, int oh_n, int ow_n) {
  const int n_b = x.shape[0], c_n = x.shape[1], h = x.shape[2], w = x.shape[3];
  MatRM<S> cols(c_n * kh * kw, static_cast<Eigen::Index>(n_b) * oh_n * ow_n);
  for (int c = 0; c < c_n; ++c) {
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        S* row = cols.row((c * kh + ki) * kw + kj).data();
        for (int n = 0; n < n_b; ++n) {
          const S* img = x.ptr() + (static_cast<Eigen::Index>(n) * c_n + c) * h * w;
          for (int oh = 0; oh < oh_n; ++oh) {
            const int ih = oh * stride - pad + ki;
            S* dst = row + (static_cast<Eigen::Index>(n) * oh_n + oh) * ow_n;
            if (ih < 0 || ih >= h) {
              for (int ow = 0; ow < ow_n; ++ow) dst[ow] = S(0);
              continue;
            }
            const S* src = img + static_cast<Eigen::Index>(ih) * w;
            for (int ow = 0; ow < ow_n; ++ow) {
              const int iw = ow * stride - pad + kj;
              dst[ow] = (iw >= 0 && iw < w) ? src[iw] : S(0);
            }
          }
        }
      }
    }
  }
  return cols;
}

template <typename S>
void col2im_accumulate(const MatRM<S>& dcols, Tensor<S>& dx, int kh, int kw, int stride, int pad,
                       int oh_n, int ow_n) {
  const int n_b = dx.shape[0], c_n = dx.shape[1], h = dx.shape[2], w = dx.shape[3];
  for (int c = 0; c < c_n; ++c) {
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        const S* row = dcols.row((c * kh + ki) * kw + kj).data();
        for (int n = 0; n < n_b; ++n) {
          S* img = dx.ptr() + (static_cast<Eigen::Index>(n) * c_n + c) * h * w;
          for (int oh = 0; oh < oh_n; ++oh) {
            const int ih = oh * stride - pad + ki;
            if (ih < 0 || ih >= h) continue;
            const S* src = row + (static_cast<Eigen::Index>(n) * oh_n + oh) * ow_n;
            S* dst = img + static_cast<Eigen::Index>(ih) * w;
            for (int ow = 0; ow < ow_n; ++ow) {
              const int iw = ow * stride - pad + kj;
              if (iw >= 0 && iw < w) dst[iw] += src[ow];
            }
          }
        }
      }
    }
  }
}
}  // namespace detail

/// 2-d cross-correlation with bias. x: N×C×H×W, w: K×C×kh×kw, b: K.
template <typename S>
int conv2d(Tape<S>& tape, int x_id, int w_id, int b_id, int stride, int padding) {
  const Tensor<S>& x = tape.value(x_id);
  const Tensor<S>& w = tape.value(w_id);
  const Tensor<S>& b = tape.value(b_id);
  check(x.rank() == 4, "conv2d: input must be N,C,H,W, got " + x.shape_str());
  check(w.rank() == 4, "conv2d: kernel must be K,C,kh,kw, got " + w.shape_str());
  check(x.shape[1] == w.shape[1],
        "conv2d: input channels do not match kernel, input " + x.shape_str() + " vs kernel " +
            w.shape_str());
  check(b.rank() == 1 && b.shape[0] == w.shape[0],
        "conv2d: bias " + b.shape_str() + " does not match kernel " + w.shape_str());
  check(stride >= 1, "conv2d: stride must be >= 1");
  check(padding >= 0, "conv2d: padding must be >= 0");
  const int n_b = x.shape[0], kh = w.shape[2], kw = w.shape[3], k_n = w.shape[0];
  const int oh_n = detail::conv_out_extent(x.shape[2], kh, stride, padding);
  const int ow_n = detail::conv_out_extent(x.shape[3], kw, stride, padding);
  check(oh_n >= 1 && ow_n >= 1,
        "conv2d: kernel " + w.shape_str() + " does not fit input " + x.shape_str());
  const Eigen::Index spatial = static_cast<Eigen::Index>(oh_n) * ow_n;

  auto cols = std::make_shared<detail::MatRM<S>>(
      detail::im2col(x, kh, kw, stride, padding, oh_n, ow_n));
  detail::CMapRM<S> w_map(w.ptr(), k_n, w.numel() / k_n);
  detail::MatRM<S> prod = w_map * (*cols);  // K × (N·oh·ow)

  Tensor<S> out = Tensor<S>::zeros({n_b, k_n, oh_n, ow_n});
  for (int n = 0; n < n_b; ++n)
    for (int k = 0; k < k_n; ++k) {
      const S* src = prod.row(k).data() + static_cast<Eigen::Index>(n) * spatial;
      S* dst = out.ptr() + (static_cast<Eigen::Index>(n) * k_n + k) * spatial;
      const S bias = b.data[k];
      for (Eigen::Index i = 0; i < spatial; ++i) dst[i] = src[i] + bias;
    }

  return tape.emit(
      std::move(out), {x_id, w_id, b_id},
      [cols, stride, padding, kh, kw, oh_n, ow_n, spatial](Tape<S>& t, int self) {
        const Tensor<S>& g = t.upstream(self);
        const int n_b = g.shape[0], k_n = g.shape[1];
        const int xp = t.parent(self, 0), wp = t.parent(self, 1), bp = t.parent(self, 2);
        detail::MatRM<S> gy(k_n, static_cast<Eigen::Index>(n_b) * spatial);
        for (int n = 0; n < n_b; ++n)
          for (int k = 0; k < k_n; ++k) {
            const S* src = g.ptr() + (static_cast<Eigen::Index>(n) * k_n + k) * spatial;
            S* dst = gy.row(k).data() + static_cast<Eigen::Index>(n) * spatial;
            for (Eigen::Index i = 0; i < spatial; ++i) dst[i] = src[i];
          }
        if (t.needs_grad(bp)) {
          Tensor<S>& db = t.grad_buffer(bp);
          for (int k = 0; k < k_n; ++k) db.data[k] += gy.row(k).sum();
        }
        if (t.needs_grad(wp)) {
          Tensor<S>& dw = t.grad_buffer(wp);
          detail::MapRM<S> dw_map(dw.ptr(), k_n, dw.numel() / k_n);
          dw_map.noalias() += gy * cols->transpose();
        }
        if (t.needs_grad(xp)) {
          const Tensor<S>& w = t.value(wp);
          detail::CMapRM<S> w_map(w.ptr(), k_n, w.numel() / k_n);
          detail::MatRM<S> dcols = w_map.transpose() * gy;
          detail::col2im_accumulate(dcols, t.grad_buffer(xp), kh, kw, stride, padding, oh_n, ow_n);
        }
      });
}

/// Fully connected layer: x N×F times w F×G plus broadcast bias.
template <typename S>
int dense(Tape<S>& tape, int x_id, int w_id, int b_id) {
  const Tensor<S>& x = tape.value(x_id);
  const Tensor<S>& w = tape.value(w_id);
  const Tensor<S>& b = tape.value(b_id);
  check(x.rank() == 2 && w.rank() == 2, "dense: x and w must be rank 2");
  check(x.shape[1] == w.shape[0],
        "dense: inner extents disagree, x " + x.shape_str() + " vs w " + w.shape_str());
  check(b.rank() == 1 && b.shape[0] == w.shape[1],
        "dense: bias " + b.shape_str() + " does not match w " + w.shape_str());
  const int n = x.shape[0], f = x.shape[1], g = w.shape[1];

  Tensor<S> out = Tensor<S>::zeros({n, g});
  detail::CMapRM<S> x_map(x.ptr(), n, f);
  detail::CMapRM<S> w_map(w.ptr(), f, g);
  detail::MapRM<S> out_map(out.ptr(), n, g);
  out_map.noalias() = x_map * w_map;
  detail::CMapRM<S> b_map(b.ptr(), 1, g);
  out_map.rowwise() += b_map.row(0);

  return tape.emit(std::move(out), {x_id, w_id, b_id}, [n, f, g](Tape<S>& t, int self) {
    const Tensor<S>& grad = t.upstream(self);
    detail::CMapRM<S> gy(grad.ptr(), n, g);
    const int xp = t.parent(self, 0), wp = t.parent(self, 1), bp = t.parent(self, 2);
    if (t.needs_grad(bp)) {
      Tensor<S>& db = t.grad_buffer(bp);
      detail::MapRM<S> db_map(db.ptr(), 1, g);
      db_map.row(0) += gy.colwise().sum();
    }
    if (t.needs_grad(wp)) {
      const Tensor<S>& x = t.value(xp);
      detail::CMapRM<S> x_map(x.ptr(), n, f);
      Tensor<S>& dw = t.grad_buffer(wp);
      detail::MapRM<S> dw_map(dw.ptr(), f, g);
      dw_map.noalias() += x_map.transpose() * gy;
    }
    if (t.needs_grad(xp)) {
      const Tensor<S>& w = t.value(wp);
      detail::CMapRM<S> w_map(w.ptr(), f, g);
      Tensor<S>& dx = t.grad_buffer(xp);
      detail::MapRM<S> dx_map(dx.ptr(), n, f);
      dx_map.noalias() += gy * w_map.transpose();
    }
  });
}

/// Per-channel running statistics owned by a normalization layer.
template <typename S>
struct BatchNormState {
  Tensor<S> running_mean;
  Tensor<S> running_var;

  static BatchNormState init(int channels) {
    BatchNormState s;
    s.running_mean = Tensor<S>::zeros({channels});
    s.running_var = Tensor<S>::full({channels}, S(1));
    return s;
  }
};

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;

/// Channel-wise normalization over (N, H, W). Train mode uses batch statistics
/// and folds them into `state` with momentum 0.9; eval mode reads `state`.
template <typename S>
int batch_norm(Tape<S>& tape, int x_id, int gamma_id, int beta_id, BatchNormState<S>& state,
               RunMode mode) {
  const Tensor<S>& x = tape.value(x_id);
  const Tensor<S>& gamma = tape.value(gamma_id);
  const Tensor<S>& beta = tape.value(beta_id);
  check(x.rank() == 4, "batch_norm: input must be N,C,H,W, got " + x.shape_str());
  const int c_n = x.shape[1];
  check(gamma.rank() == 1 && gamma.shape[0] == c_n,
        "batch_norm: gamma " + gamma.shape_str() + " does not match channels of " + x.shape_str());
  check(beta.rank() == 1 && beta.shape[0] == c_n,
        "batch_norm: beta " + beta.shape_str() + " does not match channels of " + x.shape_str());
  const int n_b = x.shape[0];
  const Eigen::Index plane = static_cast<Eigen::Index>(x.shape[2]) * x.shape[3];
  const Eigen::Index m = static_cast<Eigen::Index>(n_b) * plane;
  const S eps = static_cast<S>(kBatchNormEps);

  auto mean = std::make_shared<std::vector<S>>(c_n);
  auto inv_std = std::make_shared<std::vector<S>>(c_n);
  Tensor<S> out = Tensor<S>::zeros(x.shape);

  for (int c = 0; c < c_n; ++c) {
    S mu, inv;
    if (mode == RunMode::train) {
      S sum = 0, sq = 0;
      for (int n = 0; n < n_b; ++n) {
        const S* src = x.ptr() + (static_cast<Eigen::Index>(n) * c_n + c) * plane;
        for (Eigen::Index i = 0; i < plane; ++i) {
          sum += src[i];
          sq += src[i] * src[i];
        }
      }
      mu = sum / static_cast<S>(m);
      S var = sq / static_cast<S>(m) - mu * mu;
      if (var < S(0)) var = S(0);
      inv = S(1) / std::sqrt(var + eps);
      state.running_mean.data[c] =
          static_cast<S>(kBatchNormMomentum) * state.running_mean.data[c] +
          static_cast<S>(1.0 - kBatchNormMomentum) * mu;
      state.running_var.data[c] = static_cast<S>(kBatchNormMomentum) * state.running_var.data[c] +
                                  static_cast<S>(1.0 - kBatchNormMomentum) * var;
    } else {
      mu = state.running_mean.data[c];
      inv = S(1) / std::sqrt(state.running_var.data[c] + eps);
    }
    (*mean)[c] = mu;
    (*inv_std)[c] = inv;
    const S scale = gamma.data[c] * inv;
    const S shift = beta.data[c] - scale * mu;
    for (int n = 0; n < n_b; ++n) {
      const S* src = x.ptr() + (static_cast<Eigen::Index>(n) * c_n + c) * plane;
      S* dst = out.ptr() + (static_cast<Eigen::Index>(n) * c_n + c) * plane;
      for (Eigen::Index i = 0; i < plane; ++i) dst[i] = scale * src[i] + shift;
    }
  }

  return tape.emit(
      std::move(out), {x_id, gamma_id, beta_id},
      [mean, inv_std, mode, n_b, c_n, plane, m](Tape<S>& t, int self) {
        const Tensor<S>& g = t.upstream(self);
        const int xp = t.parent(self, 0), gp = t.parent(self, 1), bp = t.parent(self, 2);
        const Tensor<S>& x = t.value(xp);
        const Tensor<S>& gamma = t.value(gp);
        const bool want_x = t.needs_grad(xp);
        const bool want_g = t.needs_grad(gp);
        const bool want_b = t.needs_grad(bp);
        for (int c = 0; c < c_n; ++c) {
          const S mu = (*mean)[c], inv = (*inv_std)[c];
          S sum_dy = 0, sum_dy_xhat = 0;
          for (int n = 0; n < n_b; ++n) {
            const S* gy = g.ptr() + (static_cast<Eigen::Index>(n) * c_n + c) * plane;
            const S* xv = x.ptr() + (static_cast<Eigen::Index>(n) * c_n + c) * plane;
            for (Eigen::Index i = 0; i < plane; ++i) {
              sum_dy += gy[i];
              sum_dy_xhat += gy[i] * (xv[i] - mu) * inv;
            }
          }
          if (want_g) t.grad_buffer(gp).data[c] += sum_dy_xhat;
          if (want_b) t.grad_buffer(bp).data[c] += sum_dy;
          if (!want_x) continue;
          Tensor<S>& dx = t.grad_buffer(xp);
          const S k = gamma.data[c] * inv;
          if (mode == RunMode::train) {
            const S mean_dy = sum_dy / static_cast<S>(m);
            const S mean_dy_xhat = sum_dy_xhat / static_cast<S>(m);
            for (int n = 0; n < n_b; ++n) {
              const S* gy = g.ptr() + (static_cast<Eigen::Index>(n) * c_n + c) * plane;
              const S* xv = x.ptr() + (static_cast<Eigen::Index>(n) * c_n + c) * plane;
              S* dst = dx.ptr() + (static_cast<Eigen::Index>(n) * c_n + c) * plane;
              for (Eigen::Index i = 0; i < plane; ++i) {
                const S xhat = (xv[i] - mu) * inv;
                dst[i] += k * (gy[i] - mean_dy - xhat * mean_dy_xhat);
              }
            }
          } else {
            for (int n = 0; n < n_b; ++n) {
              const S* gy = g.ptr() + (static_cast<Eigen::Index>(n) * c_n + c) * plane;
              S* dst = dx.ptr() + (static_cast<Eigen::Index>(n) * c_n + c) * plane;
              for (Eigen::Index i = 0; i < plane; ++i) dst[i] += k * gy[i];
            }
          }
        }
      });
}

template <typename S>
int relu(Tape<S>& tape, int x_id) {
  const Tensor<S>& x = tape.value(x_id);
  Tensor<S> out = x;
  out.requires_grad = false;
  out.data = x.data.max(S(0));
  return tape.emit(std::move(out), {x_id}, [](Tape<S>& t, int self) {
    const int xp = t.parent(self, 0);
    if (!t.needs_grad(xp)) return;
    const Tensor<S>& x = t.value(xp);
    t.grad_buffer(xp).data += t.upstream(self).data * (x.data > S(0)).template cast<S>();
  });
}

template <typename S>
int sigmoid(Tape<S>& tape, int x_id) {
  const Tensor<S>& x = tape.value(x_id);
  Tensor<S> out = x;
  out.requires_grad = false;
  out.data = S(1) / (S(1) + (-x.data).exp());
  return tape.emit(std::move(out), {x_id}, [](Tape<S>& t, int self) {
    const int xp = t.parent(self, 0);
    if (!t.needs_grad(xp)) return;
    const Tensor<S>& y = t.value(self);
    t.grad_buffer(xp).data += t.upstream(self).data * y.data * (S(1) - y.data);
  });
}

template <typename S>
int add(Tape<S>& tape, int a_id, int b_id) {
  const Tensor<S>& a = tape.value(a_id);
  const Tensor<S>& b = tape.value(b_id);
  check_same_shape(a, b, "add");
  Tensor<S> out = a;
  out.requires_grad = false;
  out.data = a.data + b.data;
  return tape.emit(std::move(out), {a_id, b_id}, [](Tape<S>& t, int self) {
    for (int i = 0; i < 2; ++i) {
      const int p = t.parent(self, i);
      if (t.needs_grad(p)) t.grad_buffer(p).data += t.upstream(self).data;
    }
  });
}

template <typename S>
int mul_scalar(Tape<S>& tape, int x_id, S factor) {
  const Tensor<S>& x = tape.value(x_id);
  Tensor<S> out = x;
  out.requires_grad = false;
  out.data = x.data * factor;
  return tape.emit(std::move(out), {x_id}, [factor](Tape<S>& t, int self) {
    const int xp = t.parent(self, 0);
    if (t.needs_grad(xp)) t.grad_buffer(xp).data += t.upstream(self).data * factor;
  });
}

template <typename S>
int sum(Tape<S>& tape, int x_id) {
  const Tensor<S>& x = tape.value(x_id);
  Tensor<S> out = Tensor<S>::scalar(x.data.sum());
  return tape.emit(std::move(out), {x_id}, [](Tape<S>& t, int self) {
    const int xp = t.parent(self, 0);
    if (t.needs_grad(xp)) t.grad_buffer(xp).data += t.upstream(self).data[0];
  });
}

/// Spatial mean per channel: N×C×H×W -> N×C.
template <typename S>
int global_avg_pool(Tape<S>& tape, int x_id) {
  const Tensor<S>& x = tape.value(x_id);
  check(x.rank() == 4, "global_avg_pool: input must be N,C,H,W, got " + x.shape_str());
  const int n_b = x.shape[0], c_n = x.shape[1];
  const Eigen::Index plane = static_cast<Eigen::Index>(x.shape[2]) * x.shape[3];
  Tensor<S> out = Tensor<S>::zeros({n_b, c_n});
  for (int n = 0; n < n_b; ++n)
    for (int c = 0; c < c_n; ++c) {
      const S* src = x.ptr() + (static_cast<Eigen::Index>(n) * c_n + c) * plane;
      S acc = 0;
      for (Eigen::Index i = 0; i < plane; ++i) acc += src[i];
      out.data[static_cast<Eigen::Index>(n) * c_n + c] = acc / static_cast<S>(plane);
    }
  return tape.emit(std::move(out), {x_id}, [n_b, c_n, plane](Tape<S>& t, int self) {
    const int xp = t.parent(self, 0);
    if (!t.needs_grad(xp)) return;
    const Tensor<S>& g = t.upstream(self);
    Tensor<S>& dx = t.grad_buffer(xp);
    for (int n = 0; n < n_b; ++n)
      for (int c = 0; c < c_n; ++c) {
        const S v = g.data[static_cast<Eigen::Index>(n) * c_n + c] / static_cast<S>(plane);
        S* dst = dx.ptr() + (static_cast<Eigen::Index>(n) * c_n + c) * plane;
        for (Eigen::Index i = 0; i < plane; ++i) dst[i] += v;
      }
  });
}

template <typename S>
int max_pool2d(Tape<S>& tape, int x_id, int k, int stride, int pad) {
  const Tensor<S>& x = tape.value(x_id);
  check(x.rank() == 4, "max_pool2d: input must be N,C,H,W, got " + x.shape_str());
  const int n_b = x.shape[0], c_n = x.shape[1], h = x.shape[2], w = x.shape[3];
  const int oh_n = detail::conv_out_extent(h, k, stride, pad);
  const int ow_n = detail::conv_out_extent(w, k, stride, pad);
  check(oh_n >= 1 && ow_n >= 1, "max_pool2d: window does not fit input " + x.shape_str());
  Tensor<S> out = Tensor<S>::zeros({n_b, c_n, oh_n, ow_n});
  auto argmax = std::make_shared<std::vector<Eigen::Index>>(out.numel());
  Eigen::Index o = 0;
  for (int n = 0; n < n_b; ++n)
    for (int c = 0; c < c_n; ++c) {
      const Eigen::Index base = (static_cast<Eigen::Index>(n) * c_n + c) * h * w;
      for (int oh = 0; oh < oh_n; ++oh)
        for (int ow = 0; ow < ow_n; ++ow, ++o) {
          S best = -std::numeric_limits<S>::infinity();
          Eigen::Index best_idx = -1;
          for (int ki = 0; ki < k; ++ki) {
            const int ih = oh * stride - pad + ki;
            if (ih < 0 || ih >= h) continue;
            for (int kj = 0; kj < k; ++kj) {
              const int iw = ow * stride - pad + kj;
              if (iw < 0 || iw >= w) continue;
              const Eigen::Index idx = base + static_cast<Eigen::Index>(ih) * w + iw;
              if (x.data[idx] > best) {
                best = x.data[idx];
                best_idx = idx;
              }
            }
          }
          check(best_idx >= 0, "max_pool2d: window contains no valid pixel");
          out.data[o] = best;
          (*argmax)[o] = best_idx;
        }
    }
  return tape.emit(std::move(out), {x_id}, [argmax](Tape<S>& t, int self) {
    const int xp = t.parent(self, 0);
    if (!t.needs_grad(xp)) return;
    const Tensor<S>& g = t.upstream(self);
    Tensor<S>& dx = t.grad_buffer(xp);
    for (Eigen::Index i = 0; i < g.numel(); ++i) dx.data[(*argmax)[i]] += g.data[i];
  });
}

/// Inverted dropout: train mode zeroes with probability `rate` and scales
/// survivors by 1/(1-rate); eval mode is exactly the identity.
template <typename S>
int dropout(Tape<S>& tape, int x_id, double rate, RunMode mode, Rng& rng) {
  check(rate >= 0.0 && rate < 1.0, "dropout: rate must be in [0, 1)");
  if (mode == RunMode::eval || rate == 0.0) return x_id;
  const Tensor<S>& x = tape.value(x_id);
  const S keep_scale = static_cast<S>(1.0 / (1.0 - rate));
  auto mask = std::make_shared<Eigen::Array<S, Eigen::Dynamic, 1>>(x.numel());
  for (Eigen::Index i = 0; i < x.numel(); ++i)
    (*mask)[i] = rng.uniform() < rate ? S(0) : keep_scale;
  Tensor<S> out = x;
  out.requires_grad = false;
  out.data = x.data * (*mask);
  return tape.emit(std::move(out), {x_id}, [mask](Tape<S>& t, int self) {
    const int xp = t.parent(self, 0);
    if (t.needs_grad(xp)) t.grad_buffer(xp).data += t.upstream(self).data * (*mask);
  });
}

inline constexpr double kBceClamp = 1e-7;

/// Mean binary cross-entropy against fixed 0/1 labels. Probabilities are
/// clamped into [1e-7, 1-1e-7] before the log.
template <typename S>
int bce_loss(Tape<S>& tape, int prob_id, const Tensor<S>& labels) {
  const Tensor<S>& p = tape.value(prob_id);
  check_same_shape(p, labels, "bce_loss");
  for (Eigen::Index i = 0; i < labels.numel(); ++i)
    check(labels.data[i] == S(0) || labels.data[i] == S(1), "bce_loss: labels must be 0 or 1");
  const S lo = static_cast<S>(kBceClamp), hi = S(1) - static_cast<S>(kBceClamp);
  const Eigen::Index n = p.numel();
  S acc = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    S pc = p.data[i];
    pc = pc < lo ? lo : (pc > hi ? hi : pc);
    acc += -(labels.data[i] * std::log(pc) + (S(1) - labels.data[i]) * std::log(S(1) - pc));
  }
  Tensor<S> out = Tensor<S>::scalar(acc / static_cast<S>(n));
  auto y = std::make_shared<Tensor<S>>(labels);
  return tape.emit(std::move(out), {prob_id}, [y, lo, hi, n](Tape<S>& t, int self) {
    const int pp = t.parent(self, 0);
    if (!t.needs_grad(pp)) return;
    const Tensor<S>& p = t.value(pp);
    const S g = t.upstream(self).data[0] / static_cast<S>(n);
    Tensor<S>& dp = t.grad_buffer(pp);
    for (Eigen::Index i = 0; i < n; ++i) {
      const S pc = p.data[i];
      if (pc <= lo || pc >= hi) continue;  // clamped region: flat
      dp.data[i] += g * (pc - y->data[i]) / (pc * (S(1) - pc));
    }
  });
}

}  // namespace wornet
