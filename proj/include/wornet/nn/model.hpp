#pragma once

#include "wornet/data/mask.hpp"
#include "wornet/nn/blocks.hpp"

#include <string>
#include <vector>

namespace wornet {

enum class AttentionMode { soft, hard, box, none };
enum class Placement { all, first };
enum class StemKind { desk, classic };

inline std::string attention_mode_name(AttentionMode m) {
  switch (m) {
    case AttentionMode::soft: return "soft";
    case AttentionMode::hard: return "hard";
    case AttentionMode::box: return "box";
    default: return "none";
  }
}

inline AttentionMode parse_attention_mode(const std::string& s) {
  if (s == "soft") return AttentionMode::soft;
  if (s == "hard") return AttentionMode::hard;
  if (s == "box") return AttentionMode::box;
  if (s == "none") return AttentionMode::none;
  fail("unknown attention mode \"" + s + "\", expected soft|hard|box|none");
}

inline std::string placement_name(Placement p) { return p == Placement::all ? "all" : "first"; }

inline Placement parse_placement(const std::string& s) {
  if (s == "all") return Placement::all;
  if (s == "first") return Placement::first;
  fail("unknown attention placement \"" + s + "\", expected all|first");
}

inline std::string stem_kind_name(StemKind k) { return k == StemKind::desk ? "desk" : "classic"; }

inline StemKind parse_stem_kind(const std::string& s) {
  if (s == "desk") return StemKind::desk;
  if (s == "classic") return StemKind::classic;
  fail("unknown stem kind \"" + s + "\", expected desk|classic");
}

/// Everything needed to rebuild a network: stage layout (bottlenecks per
/// stage), stem width and kind, square input resolution, attention mode and
/// placement, head widths, dropout rate.
struct ModelConfig {
  std::vector<int> layout{1, 1, 1};
  int stem_channels = 8;
  int input_size = 64;
  StemKind stem = StemKind::desk;
  AttentionMode mode = AttentionMode::soft;
  Placement placement = Placement::all;
  std::vector<int> head_widths{256, 256};
  double dropout = 0.5;
};

inline void validate_config(const ModelConfig& cfg) {
  check(!cfg.layout.empty(), "model layout must list at least one stage");
  for (int n : cfg.layout) check(n >= 1, "model layout entries must be >= 1");
  check(cfg.stem_channels >= 1, "stem_channels must be >= 1");
  check(cfg.input_size >= 8, "input_size must be >= 8");
  for (int wdt : cfg.head_widths) check(wdt >= 1, "head widths must be >= 1");
  check(cfg.dropout >= 0.0 && cfg.dropout < 1.0, "dropout must lie in [0, 1)");
}

inline bool mode_uses_attention_units(AttentionMode m) {
  return m == AttentionMode::soft || m == AttentionMode::box;
}

inline int input_channels_for(AttentionMode m) { return m == AttentionMode::hard ? 5 : 3; }

/// Static dimension walk of one bottleneck position.
struct UnitShape {
  int stage = 0;
  int index = 0;
  int in_ch = 0, mid_ch = 0, out_ch = 0;
  int in_h = 0, in_w = 0;
  int out_h = 0, out_w = 0;  // dims of the second conv's output
  int stride = 1;
  bool projection = false;
  bool attention = false;
};

struct ShapeAudit {
  int stem_out_ch = 0, stem_out_h = 0, stem_out_w = 0;
  std::vector<UnitShape> units;
  int feature_ch = 0;
  int final_h = 0, final_w = 0;
};

/// Pure conv arithmetic over the whole backbone; no tensors are allocated.
/// Drives assembly, and lets shape invariants be audited for any config.
inline ShapeAudit audit_shapes(const ModelConfig& cfg) {
  validate_config(cfg);
  auto conv_out = [](int in, int k, int stride, int pad) {
    const int out = (in + 2 * pad - k) / stride + 1;
    check(out >= 1, "audit_shapes: spatial extent collapsed below 1");
    return out;
  };
  ShapeAudit audit;
  int h = cfg.input_size, w = cfg.input_size;
  if (cfg.stem == StemKind::desk) {
    h = conv_out(h, 3, 2, 1);
    w = conv_out(w, 3, 2, 1);
  } else {
    h = conv_out(h, 7, 2, 3);
    w = conv_out(w, 7, 2, 3);
    h = conv_out(h, 3, 2, 1);
    w = conv_out(w, 3, 2, 1);
  }
  audit.stem_out_ch = cfg.stem_channels;
  audit.stem_out_h = h;
  audit.stem_out_w = w;

  int in_ch = cfg.stem_channels;
  const bool units_attach = mode_uses_attention_units(cfg.mode);
  for (size_t s = 0; s < cfg.layout.size(); ++s) {
    const int mid = cfg.stem_channels << s;
    const int out_ch = 4 * mid;
    for (int u = 0; u < cfg.layout[s]; ++u) {
      UnitShape us;
      us.stage = static_cast<int>(s);
      us.index = u;
      us.in_ch = in_ch;
      us.mid_ch = mid;
      us.out_ch = out_ch;
      us.in_h = h;
      us.in_w = w;
      const bool first_unit = u == 0;
      const bool stage_downsamples = cfg.stem == StemKind::desk || s > 0;
      us.stride = first_unit && stage_downsamples ? 2 : 1;
      us.out_h = conv_out(h, 3, us.stride, 1);
      us.out_w = conv_out(w, 3, us.stride, 1);
      us.projection = us.stride != 1 || in_ch != out_ch;
      us.attention = units_attach && (cfg.placement == Placement::all ||
                                      (s == 0 && first_unit));
      audit.units.push_back(us);
      h = us.out_h;
      w = us.out_w;
      in_ch = out_ch;
    }
  }
  audit.feature_ch = in_ch;
  audit.final_h = h;
  audit.final_w = w;
  return audit;
}

template <typename S>
struct Model {
  ModelConfig config;
  uint64_t init_seed = 0;
  ConvLayer<S> stem_conv;
  bool stem_pool = false;
  std::vector<std::vector<Bottleneck<S>>> stages;
  NormLayer<S> final_norm;
  Head<S> head;

  int attention_unit_count() const {
    int n = 0;
    for (const auto& stage : stages)
      for (const auto& unit : stage) n += unit.attention ? 1 : 0;
    return n;
  }

  /// Runs the whole network on `input` (N×3×H×W, or N×5×H×W in the
  /// mask-concatenation mode) and returns the node holding N×1 worn
  /// probabilities. `att` carries the mask stack for soft/box modes and must
  /// be null otherwise.
  int forward(Binder<S>& binder, const Tensor<S>& input, const AttentionInput<S>* att,
              RunMode mode, Rng& rng) {
    Tape<S>& tape = binder.tape();
    check(input.rank() == 4, "model forward: input must be N,C,H,W, got " + input.shape_str());
    check(input.shape[1] == input_channels_for(config.mode),
          "model forward: expected " + std::to_string(input_channels_for(config.mode)) +
              " input channels for mode " + attention_mode_name(config.mode) + ", got " +
              input.shape_str());
    check(input.shape[2] == config.input_size && input.shape[3] == config.input_size,
          "model forward: input " + input.shape_str() + " does not match configured resolution " +
              std::to_string(config.input_size));
    AttentionContext<S> ctx;
    if (mode_uses_attention_units(config.mode)) {
      check(att != nullptr, "model forward: mode " + attention_mode_name(config.mode) +
                                " needs a mask stack");
      check(att->map.rank() == 4 && att->map.shape[0] == input.shape[0] &&
                att->map.shape[1] == 3 && att->map.shape[2] == input.shape[2] &&
                att->map.shape[3] == input.shape[3],
            "model forward: mask stack " + att->map.shape_str() + " does not match input " +
                input.shape_str());
      ctx.map = &att->map;
    } else {
      check(att == nullptr, "model forward: mode " + attention_mode_name(config.mode) +
                                " takes no mask stack");
    }

    int x = conv_forward(binder, "stem.conv", stem_conv, tape.leaf(input, false));
    if (stem_pool) x = max_pool2d(tape, x, 3, 2, 1);
    for (size_t s = 0; s < stages.size(); ++s)
      for (size_t u = 0; u < stages[s].size(); ++u)
        x = bottleneck_forward(binder,
                               "stage" + std::to_string(s) + ".unit" + std::to_string(u),
                               stages[s][u], x, mode, ctx.map ? &ctx : nullptr);
    x = relu(tape, norm_forward(binder, "final_norm", final_norm, x, mode));
    x = global_avg_pool(tape, x);
    return head_forward(binder, head, x, mode, rng);
  }

  /// Fixed-order traversal of every learned tensor.
  template <typename Fn>
  void visit_learned(Fn&& fn) {
    fn(std::string("stem.conv.w"), stem_conv.w);
    fn(std::string("stem.conv.b"), stem_conv.b);
    for (size_t s = 0; s < stages.size(); ++s)
      for (size_t u = 0; u < stages[s].size(); ++u) {
        const std::string p = "stage" + std::to_string(s) + ".unit" + std::to_string(u);
        Bottleneck<S>& unit = stages[s][u];
        fn(p + ".n1.gamma", unit.n1.gamma);
        fn(p + ".n1.beta", unit.n1.beta);
        fn(p + ".c1.w", unit.c1.w);
        fn(p + ".c1.b", unit.c1.b);
        fn(p + ".n2.gamma", unit.n2.gamma);
        fn(p + ".n2.beta", unit.n2.beta);
        fn(p + ".c2.w", unit.c2.w);
        fn(p + ".c2.b", unit.c2.b);
        if (unit.attention) {
          fn(p + ".att.conv.w", unit.attention->conv.w);
          fn(p + ".att.conv.b", unit.attention->conv.b);
        }
        fn(p + ".n3.gamma", unit.n3.gamma);
        fn(p + ".n3.beta", unit.n3.beta);
        fn(p + ".c3.w", unit.c3.w);
        fn(p + ".c3.b", unit.c3.b);
        if (unit.projection) {
          fn(p + ".proj.w", unit.projection->w);
          fn(p + ".proj.b", unit.projection->b);
        }
      }
    fn(std::string("final_norm.gamma"), final_norm.gamma);
    fn(std::string("final_norm.beta"), final_norm.beta);
    for (size_t i = 0; i < head.hidden.size(); ++i) {
      fn("head.fc" + std::to_string(i) + ".w", head.hidden[i].w);
      fn("head.fc" + std::to_string(i) + ".b", head.hidden[i].b);
    }
    fn(std::string("head.out.w"), head.out.w);
    fn(std::string("head.out.b"), head.out.b);
  }

  /// Fixed-order traversal of normalization running statistics.
  template <typename Fn>
  void visit_stats(Fn&& fn) {
    auto norm = [&fn](const std::string& p, NormLayer<S>& n) {
      fn(p + ".running_mean", n.state.running_mean);
      fn(p + ".running_var", n.state.running_var);
    };
    for (size_t s = 0; s < stages.size(); ++s)
      for (size_t u = 0; u < stages[s].size(); ++u) {
        const std::string p = "stage" + std::to_string(s) + ".unit" + std::to_string(u);
        norm(p + ".n1", stages[s][u].n1);
        norm(p + ".n2", stages[s][u].n2);
        norm(p + ".n3", stages[s][u].n3);
      }
    norm("final_norm", final_norm);
  }
};

/// Builds and seeds the full network described by `cfg`. The same seed always
/// produces bit-identical parameters.
template <typename S>
Model<S> assemble_backbone(const ModelConfig& cfg, uint64_t seed) {
  const ShapeAudit audit = audit_shapes(cfg);
  Rng rng(seed);
  Model<S> model;
  model.config = cfg;
  model.init_seed = seed;
  const int stem_k = cfg.stem == StemKind::desk ? 3 : 7;
  const int stem_pad = cfg.stem == StemKind::desk ? 1 : 3;
  model.stem_conv =
      make_conv<S>(input_channels_for(cfg.mode), cfg.stem_channels, stem_k, 2, stem_pad, rng);
  model.stem_pool = cfg.stem == StemKind::classic;

  model.stages.resize(cfg.layout.size());
  for (const UnitShape& us : audit.units) {
    Bottleneck<S> unit;
    unit.n1 = make_norm<S>(us.in_ch);
    unit.c1 = make_conv<S>(us.in_ch, us.mid_ch, 1, 1, 0, rng);
    unit.n2 = make_norm<S>(us.mid_ch);
    unit.c2 = make_conv<S>(us.mid_ch, us.mid_ch, 3, us.stride, 1, rng);
    unit.n3 = make_norm<S>(us.mid_ch);
    unit.c3 = make_conv<S>(us.mid_ch, us.out_ch, 1, 1, 0, rng);
    if (us.projection)
      unit.projection = make_conv<S>(us.in_ch, us.out_ch, 1, us.stride, 0, rng);
    if (us.attention) {
      AttentionUnit<S> att;
      att.target_h = us.out_h;
      att.target_w = us.out_w;
      att.target_k = us.mid_ch;
      att.conv = make_conv<S>(3, us.mid_ch, 3, 1, 1, rng);
      unit.attention = std::move(att);
    }
    model.stages[static_cast<size_t>(us.stage)].push_back(std::move(unit));
  }
  model.final_norm = make_norm<S>(audit.feature_ch);

  int in_f = audit.feature_ch;
  for (int wdt : cfg.head_widths) {
    model.head.hidden.push_back(make_dense<S>(in_f, wdt, rng));
    in_f = wdt;
  }
  model.head.out.w = init::normal<S>({in_f, 1}, 0.01, rng);
  model.head.out.b = Tensor<S>::zeros({1});
  model.head.dropout_rate = cfg.dropout;
  return model;
}

/// Zeroes every attention conv so injection contributes exactly nothing.
template <typename S>
void zero_attention_params(Model<S>& model) {
  for (auto& stage : model.stages)
    for (auto& unit : stage)
      if (unit.attention) {
        unit.attention->conv.w.data.setZero();
        unit.attention->conv.b.data.setZero();
      }
}

/// Copies src parameters and statistics into dst wherever names match.
/// Every dst tensor must find a source; extra src names (e.g. attention convs
/// absent from dst) are ignored.
template <typename S>
void copy_matching_params(Model<S>& src, Model<S>& dst) {
  std::map<std::string, const Tensor<S>*> bank;
  src.visit_learned([&bank](const std::string& n, Tensor<S>& t) { bank[n] = &t; });
  src.visit_stats([&bank](const std::string& n, Tensor<S>& t) { bank[n] = &t; });
  auto assign = [&bank](const std::string& n, Tensor<S>& t) {
    auto it = bank.find(n);
    check(it != bank.end(), "copy_matching_params: no source tensor named " + n);
    check(it->second->shape == t.shape, "copy_matching_params: shape mismatch at " + n);
    t.data = it->second->data;
  };
  dst.visit_learned(assign);
  dst.visit_stats(assign);
}

/// Same-architecture mode switch. Soft and box attention share parameters
/// exactly, so a trained model can be scored either way.
template <typename S>
Model<S> clone_with_mode(const Model<S>& model, AttentionMode new_mode) {
  check(new_mode == model.config.mode ||
            (mode_uses_attention_units(model.config.mode) && mode_uses_attention_units(new_mode)),
        "clone_with_mode: " + attention_mode_name(model.config.mode) + " and " +
            attention_mode_name(new_mode) + " models do not share an architecture");
  Model<S> out = model;
  out.config.mode = new_mode;
  return out;
}

template <typename S>
Tensor<S> mask_plane(const BinaryMask& mask) {
  Tensor<S> t = Tensor<S>::zeros({1, 1, mask.height, mask.width});
  for (Eigen::Index i = 0; i < t.numel(); ++i)
    t.data[i] = mask.pixels[static_cast<size_t>(i)] ? S(1) : S(0);
  return t;
}

/// Worn probability for one ⟨person mask, clothing mask⟩ pair on one image.
/// Image is N=1 RGB in [0,1]; the model's own mode decides how the masks are
/// presented (box mode rectangles them first). Eval mode, deterministic.
template <typename S>
double predict_pair(Model<S>& model, const Tensor<S>& image, const BinaryMask& s_mask,
                    const BinaryMask& o_mask) {
  check(image.rank() == 4 && image.shape[0] == 1 && image.shape[1] == 3,
        "predict_pair: image must be 1,3,H,W, got " + image.shape_str());
  check(s_mask.height == image.shape[2] && s_mask.width == image.shape[3] &&
            o_mask.height == image.shape[2] && o_mask.width == image.shape[3],
        "predict_pair: mask dims do not match image " + image.shape_str());

  Tape<S> tape;
  Binder<S> binder(tape, false);
  Rng rng(0);  // eval mode never draws
  int out;
  switch (model.config.mode) {
    case AttentionMode::soft: {
      AttentionInput<S> att =
          build_attention_input(mask_plane<S>(s_mask), mask_plane<S>(o_mask));
      out = model.forward(binder, image, &att, RunMode::eval, rng);
      break;
    }
    case AttentionMode::box: {
      AttentionInput<S> att = build_attention_input(
          mask_plane<S>(mask_to_box(s_mask).second), mask_plane<S>(mask_to_box(o_mask).second));
      out = model.forward(binder, image, &att, RunMode::eval, rng);
      break;
    }
    case AttentionMode::hard: {
      Tensor<S> stacked =
          hard_attention_input(image, mask_plane<S>(s_mask), mask_plane<S>(o_mask));
      out = model.forward(binder, stacked, nullptr, RunMode::eval, rng);
      break;
    }
    default:
      out = model.forward(binder, image, nullptr, RunMode::eval, rng);
  }
  double p = static_cast<double>(tape.value(out).data[0]);
  if (p < kBceClamp) p = kBceClamp;
  if (p > 1.0 - kBceClamp) p = 1.0 - kBceClamp;
  return p;
}

}  // namespace wornet
