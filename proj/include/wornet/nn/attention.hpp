#pragma once

#include "wornet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace wornet {

/// Mask stack fed to the soft attention units: channel 0 the person mask,
/// channel 1 the clothing mask, channel 2 their unclamped sum (0, 1 or 2).
template <typename S>
struct AttentionInput {
  Tensor<S> map;  // N×3×H×W
};

template <typename S>
AttentionInput<S> build_attention_input(const Tensor<S>& s_mask, const Tensor<S>& o_mask) {
  check(s_mask.rank() == 4 && s_mask.shape[1] == 1,
        "build_attention_input: s_mask must be N,1,H,W, got " + s_mask.shape_str());
  check(o_mask.rank() == 4 && o_mask.shape[1] == 1,
        "build_attention_input: o_mask must be N,1,H,W, got " + o_mask.shape_str());
  check(s_mask.same_shape(o_mask), "build_attention_input: mask dims differ, " +
                                       s_mask.shape_str() + " vs " + o_mask.shape_str());
  for (Eigen::Index i = 0; i < s_mask.numel(); ++i) {
    check(s_mask.data[i] == S(0) || s_mask.data[i] == S(1),
          "build_attention_input: s_mask must be binary");
    check(o_mask.data[i] == S(0) || o_mask.data[i] == S(1),
          "build_attention_input: o_mask must be binary");
  }
  const int n = s_mask.shape[0], h = s_mask.shape[2], w = s_mask.shape[3];
  const Eigen::Index plane = static_cast<Eigen::Index>(h) * w;
  AttentionInput<S> att;
  att.map = Tensor<S>::zeros({n, 3, h, w});
  for (int i = 0; i < n; ++i) {
    const S* s = s_mask.ptr() + i * plane;
    const S* o = o_mask.ptr() + i * plane;
    S* dst = att.map.ptr() + static_cast<Eigen::Index>(i) * 3 * plane;
    for (Eigen::Index p = 0; p < plane; ++p) {
      dst[p] = s[p];
      dst[plane + p] = o[p];
      dst[2 * plane + p] = s[p] + o[p];
    }
  }
  return att;
}

/// Five-channel input for the mask-concatenation variant: the two masks ahead
/// of the image's RGB planes, so the stem sees the pair selection directly.
template <typename S>
Tensor<S> hard_attention_input(const Tensor<S>& image, const Tensor<S>& s_mask,
                               const Tensor<S>& o_mask) {
  check(image.rank() == 4 && image.shape[1] == 3,
        "hard_attention_input: image must be N,3,H,W, got " + image.shape_str());
  check(s_mask.rank() == 4 && s_mask.shape[1] == 1 && o_mask.rank() == 4 && o_mask.shape[1] == 1,
        "hard_attention_input: masks must be N,1,H,W");
  check(s_mask.shape[0] == image.shape[0] && s_mask.shape[2] == image.shape[2] &&
            s_mask.shape[3] == image.shape[3] && o_mask.same_shape(s_mask),
        "hard_attention_input: mask dims " + s_mask.shape_str() + " do not match image " +
            image.shape_str());
  const int n = image.shape[0], h = image.shape[2], w = image.shape[3];
  const Eigen::Index plane = static_cast<Eigen::Index>(h) * w;
  Tensor<S> out = Tensor<S>::zeros({n, 5, h, w});
  for (int i = 0; i < n; ++i) {
    S* dst = out.ptr() + static_cast<Eigen::Index>(i) * 5 * plane;
    const S* s = s_mask.ptr() + i * plane;
    const S* o = o_mask.ptr() + i * plane;
    const S* rgb = image.ptr() + static_cast<Eigen::Index>(i) * 3 * plane;
    for (Eigen::Index p = 0; p < plane; ++p) {
      dst[p] = s[p];
      dst[plane + p] = o[p];
    }
    for (Eigen::Index p = 0; p < 3 * plane; ++p) dst[2 * plane + p] = rgb[p];
  }
  return out;
}

/// Box-filter resampling to (target_h, target_w): every output pixel is the
/// area-weighted average of the input region it covers. Equal dims return the
/// input unchanged.
template <typename S>
Tensor<S> resize_area(const Tensor<S>& map, int target_h, int target_w) {
  check(map.rank() == 4, "resize_area: input must be N,C,H,W, got " + map.shape_str());
  check(target_h >= 1 && target_w >= 1, "resize_area: target dims must be >= 1");
  const int n_b = map.shape[0], c_n = map.shape[1], h = map.shape[2], w = map.shape[3];
  if (target_h == h && target_w == w) return map;

  auto axis = [](int in, int out) {
    std::vector<int> first(out);
    std::vector<std::vector<double>> wts(out);
    const double scale = static_cast<double>(in) / out;
    for (int i = 0; i < out; ++i) {
      const double lo = i * scale, hi = (i + 1) * scale;
      int r0 = static_cast<int>(lo);
      if (r0 >= in) r0 = in - 1;
      first[i] = r0;
      for (int r = r0; r < in && r < hi; ++r) {
        const double cover = std::min<double>(r + 1, hi) - std::max<double>(r, lo);
        if (cover <= 0.0) break;
        wts[i].push_back(cover);
      }
      if (wts[i].empty()) wts[i].push_back(1.0);  // degenerate guard
    }
    return std::pair(first, wts);
  };
  auto [row_first, row_w] = axis(h, target_h);
  auto [col_first, col_w] = axis(w, target_w);
  const double area = (static_cast<double>(h) / target_h) * (static_cast<double>(w) / target_w);

  Tensor<S> out = Tensor<S>::zeros({n_b, c_n, target_h, target_w});
  for (int n = 0; n < n_b; ++n)
    for (int c = 0; c < c_n; ++c) {
      const S* src = map.ptr() + (static_cast<Eigen::Index>(n) * c_n + c) * h * w;
      S* dst = out.ptr() +
               (static_cast<Eigen::Index>(n) * c_n + c) * target_h * target_w;
      for (int i = 0; i < target_h; ++i)
        for (int j = 0; j < target_w; ++j) {
          double acc = 0.0;
          for (size_t ri = 0; ri < row_w[i].size(); ++ri) {
            const int r = row_first[i] + static_cast<int>(ri);
            double row_acc = 0.0;
            for (size_t ci = 0; ci < col_w[j].size(); ++ci) {
              const int cc = col_first[j] + static_cast<int>(ci);
              row_acc += col_w[j][ci] * static_cast<double>(src[static_cast<Eigen::Index>(r) * w + cc]);
            }
            acc += row_w[i][ri] * row_acc;
          }
          dst[static_cast<Eigen::Index>(i) * target_w + j] = static_cast<S>(acc / area);
        }
    }
  return out;
}

}  // namespace wornet
