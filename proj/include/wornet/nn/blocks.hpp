#pragma once

#include "wornet/nn/attention.hpp"
#include "wornet/ops.hpp"
#include "wornet/rng.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wornet {

/// Registers parameter tensors on a tape for one forward pass and remembers
/// which node each landed on, so the optimizer can read gradients back into
/// the stored tensors afterwards.
template <typename S>
class Binder {
 public:
  struct Entry {
    std::string name;
    Tensor<S>* value;
    int node;
  };

  Binder(Tape<S>& tape, bool track_grads) : tape_(&tape), track_(track_grads) {}

  int bind(const std::string& name, Tensor<S>& t) {
    const int id = tape_->leaf(t, track_);
    entries_.push_back({name, &t, id});
    return id;
  }

  const std::vector<Entry>& entries() const { return entries_; }
  Tape<S>& tape() { return *tape_; }

 private:
  Tape<S>* tape_;
  bool track_;
  std::vector<Entry> entries_;
};

template <typename S>
struct ConvLayer {
  Tensor<S> w;  // K×C×kh×kw
  Tensor<S> b;  // K
  int stride = 1;
  int pad = 0;
};

template <typename S>
struct NormLayer {
  Tensor<S> gamma;
  Tensor<S> beta;
  BatchNormState<S> state;
};

template <typename S>
struct DenseLayer {
  Tensor<S> w;  // F×G
  Tensor<S> b;  // G
};

/// One soft attention unit: the host bottleneck's second-conv output dims it
/// must match, and the single 3×3 conv that maps the resized mask stack to
/// K channels. No activation of its own.
template <typename S>
struct AttentionUnit {
  int target_h = 0;
  int target_w = 0;
  int target_k = 0;
  ConvLayer<S> conv;
};

/// Pre-activation bottleneck: three norm/relu/conv steps (reduce, spatial,
/// expand) with the stride on the 3×3, plus a projection shortcut whenever
/// the input dims differ from the output dims.
template <typename S>
struct Bottleneck {
  NormLayer<S> n1;
  ConvLayer<S> c1;  // 1×1 reduce
  NormLayer<S> n2;
  ConvLayer<S> c2;  // 3×3 spatial, carries the stride
  NormLayer<S> n3;
  ConvLayer<S> c3;  // 1×1 expand
  std::optional<ConvLayer<S>> projection;
  std::optional<AttentionUnit<S>> attention;
};

template <typename S>
struct Head {
  std::vector<DenseLayer<S>> hidden;
  DenseLayer<S> out;
  double dropout_rate = 0.5;
};

namespace init {
template <typename S>
Tensor<S> he_normal(std::vector<int> shape, Eigen::Index fan_in, Rng& rng) {
  Tensor<S> t = Tensor<S>::zeros(std::move(shape));
  const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (Eigen::Index i = 0; i < t.numel(); ++i)
    t.data[i] = static_cast<S>(rng.normal(0.0, std_dev));
  return t;
}

template <typename S>
Tensor<S> normal(std::vector<int> shape, double std_dev, Rng& rng) {
  Tensor<S> t = Tensor<S>::zeros(std::move(shape));
  for (Eigen::Index i = 0; i < t.numel(); ++i)
    t.data[i] = static_cast<S>(rng.normal(0.0, std_dev));
  return t;
}
}  // namespace init

template <typename S>
ConvLayer<S> make_conv(int in_ch, int out_ch, int k, int stride, int pad, Rng& rng) {
  ConvLayer<S> c;
  c.w = init::he_normal<S>({out_ch, in_ch, k, k}, static_cast<Eigen::Index>(in_ch) * k * k, rng);
  c.b = Tensor<S>::zeros({out_ch});
  c.stride = stride;
  c.pad = pad;
  return c;
}

template <typename S>
NormLayer<S> make_norm(int channels) {
  NormLayer<S> n;
  n.gamma = Tensor<S>::full({channels}, S(1));
  n.beta = Tensor<S>::zeros({channels});
  n.state = BatchNormState<S>::init(channels);
  return n;
}

template <typename S>
DenseLayer<S> make_dense(int in_f, int out_f, Rng& rng) {
  DenseLayer<S> d;
  d.w = init::he_normal<S>({in_f, out_f}, in_f, rng);
  d.b = Tensor<S>::zeros({out_f});
  return d;
}

template <typename S>
int conv_forward(Binder<S>& binder, const std::string& prefix, ConvLayer<S>& layer, int x) {
  const int w = binder.bind(prefix + ".w", layer.w);
  const int b = binder.bind(prefix + ".b", layer.b);
  return conv2d(binder.tape(), x, w, b, layer.stride, layer.pad);
}

template <typename S>
int norm_forward(Binder<S>& binder, const std::string& prefix, NormLayer<S>& layer, int x,
                 RunMode mode) {
  const int g = binder.bind(prefix + ".gamma", layer.gamma);
  const int b = binder.bind(prefix + ".beta", layer.beta);
  return batch_norm(binder.tape(), x, g, b, layer.state, mode);
}

template <typename S>
int dense_forward(Binder<S>& binder, const std::string& prefix, DenseLayer<S>& layer, int x) {
  const int w = binder.bind(prefix + ".w", layer.w);
  const int b = binder.bind(prefix + ".b", layer.b);
  return dense(binder.tape(), x, w, b);
}

/// Resized attention maps shared by every unit that needs the same spatial
/// dims within one forward pass.
template <typename S>
struct AttentionContext {
  const Tensor<S>* map = nullptr;  // N×3×Hin×Win
  std::map<std::pair<int, int>, int> resized;

  int resized_node(Tape<S>& tape, int h, int w) {
    const auto key = std::make_pair(h, w);
    auto it = resized.find(key);
    if (it != resized.end()) return it->second;
    const int node = tape.leaf(resize_area(*map, h, w), false);
    resized.emplace(key, node);
    return node;
  }
};

/// The injection step: resize the mask stack to the host's second-conv dims,
/// run the unit's conv, add onto the conv output.
template <typename S>
int soft_attention_unit(Binder<S>& binder, const std::string& prefix, AttentionUnit<S>& unit,
                        AttentionContext<S>& ctx, int conv2_out) {
  Tape<S>& tape = binder.tape();
  const Tensor<S>& host = tape.value(conv2_out);
  check(host.shape[2] == unit.target_h && host.shape[3] == unit.target_w &&
            host.shape[1] == unit.target_k,
        "soft_attention_unit: host output " + host.shape_str() + " does not match unit target [" +
            std::to_string(unit.target_k) + "," + std::to_string(unit.target_h) + "," +
            std::to_string(unit.target_w) + "]");
  const int resized = ctx.resized_node(tape, unit.target_h, unit.target_w);
  const int att = conv_forward(binder, prefix + ".conv", unit.conv, resized);
  return add(tape, conv2_out, att);
}

template <typename S>
int bottleneck_forward(Binder<S>& binder, const std::string& prefix, Bottleneck<S>& unit, int x,
                       RunMode mode, AttentionContext<S>* att) {
  Tape<S>& tape = binder.tape();
  const int pre = relu(tape, norm_forward(binder, prefix + ".n1", unit.n1, x, mode));
  const int shortcut =
      unit.projection ? conv_forward(binder, prefix + ".proj", *unit.projection, pre) : x;
  int y = conv_forward(binder, prefix + ".c1", unit.c1, pre);
  y = conv_forward(binder, prefix + ".c2", unit.c2,
                   relu(tape, norm_forward(binder, prefix + ".n2", unit.n2, y, mode)));
  if (unit.attention) {
    check(att != nullptr && att->map != nullptr,
          "bottleneck_forward: unit has an attention unit but no mask stack was supplied");
    y = soft_attention_unit(binder, prefix + ".att", *unit.attention, *att, y);
  }
  y = conv_forward(binder, prefix + ".c3", unit.c3,
                   relu(tape, norm_forward(binder, prefix + ".n3", unit.n3, y, mode)));
  check_same_shape(tape.value(y), tape.value(shortcut), prefix + " residual add");
  return add(tape, y, shortcut);
}

/// dense→relu→dropout twice, then the single-logit sigmoid output.
template <typename S>
int head_forward(Binder<S>& binder, Head<S>& head, int features, RunMode mode, Rng& rng) {
  Tape<S>& tape = binder.tape();
  int y = features;
  for (size_t i = 0; i < head.hidden.size(); ++i) {
    y = relu(tape, dense_forward(binder, "head.fc" + std::to_string(i), head.hidden[i], y));
    y = dropout(tape, y, head.dropout_rate, mode, rng);
  }
  y = dense_forward(binder, "head.out", head.out, y);
  return sigmoid(tape, y);
}

}  // namespace wornet
