// Release gate: one self-contained check per shipping criterion, each printed
// as a single PASS/FAIL line with its elapsed time. Exit status is zero only
// if every criterion passes. Budgets are part of the criteria: a check that
// overruns its time budget fails even if its assertions hold.

#include <wornet/config.hpp>
#include <wornet/data/dataset.hpp>
#include <wornet/gradcheck.hpp>
#include <wornet/nn/checkpoint.hpp>
#include <wornet/nn/model.hpp>
#include <wornet/relation.hpp>
#include <wornet/train/evaluate.hpp>
#include <wornet/train/trainer.hpp>

#include "../support/test_utils.hpp"

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace wornet;

namespace {

using clk = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

ModelConfig full_config(std::vector<int> layout, Placement placement) {
  ModelConfig cfg;
  cfg.layout = std::move(layout);
  cfg.stem = StemKind::classic;
  cfg.input_size = 224;
  cfg.stem_channels = 64;
  cfg.mode = AttentionMode::soft;
  cfg.placement = placement;
  return cfg;
}

// --- criterion 1: attention unit counts ------------------------------------

Outcome unit_counts() {
  struct Case {
    std::vector<int> layout;
    Placement placement;
    int expected;
  };
  const std::vector<Case> cases = {{{3, 4, 6, 3}, Placement::all, 16},
                                   {{3, 4, 23, 3}, Placement::all, 33},
                                   {{3, 4, 6, 3}, Placement::first, 1},
                                   {{3, 4, 23, 3}, Placement::first, 1}};
  std::vector<int> got;
  for (const Case& c : cases) {
    ModelConfig cfg = full_config(c.layout, c.placement);
    const ShapeAudit audit = audit_shapes(cfg);
    int audited = 0;
    for (const UnitShape& u : audit.units) audited += u.attention ? 1 : 0;

    // count again on a genuinely assembled network; unit count is independent
    // of channel width, so assemble a narrow variant to keep this instant
    cfg.stem_channels = 4;
    const int assembled = assemble_backbone<float>(cfg, 1).attention_unit_count();
    if (audited != c.expected || assembled != c.expected)
      return {false, fmt("layout depth %zu placement %s: audited %d assembled %d expected %d",
                         c.layout.size(), c.placement == Placement::all ? "all" : "first",
                         audited, assembled, c.expected)};
    got.push_back(assembled);
  }
  return {true, fmt("16-unit and 33-unit layouts, single-unit placement: %d/%d/%d/%d",
                    got[0], got[1], got[2], got[3])};
}

// --- criterion 2: attention shape law over both full layouts ----------------

Outcome shape_law() {
  int audited = 0;
  for (const std::vector<int>& layout : {std::vector<int>{3, 4, 6, 3},
                                         std::vector<int>{3, 4, 23, 3}}) {
    const ModelConfig cfg = full_config(layout, Placement::all);
    const Model<float> model = assemble_backbone<float>(cfg, 2);

    // walk the constructed layers, recomputing every spatial extent from the
    // actual kernel/stride/pad fields rather than trusting the planner
    auto out_extent = [](int in, int k, int stride, int pad) {
      return (in + 2 * pad - k) / stride + 1;
    };
    int h = cfg.input_size;
    h = out_extent(h, int(model.stem_conv.w.shape[2]), model.stem_conv.stride,
                   model.stem_conv.pad);
    if (model.stem_pool) h = out_extent(h, 3, 2, 1);
    for (size_t s = 0; s < model.stages.size(); ++s)
      for (size_t u = 0; u < model.stages[s].size(); ++u) {
        const Bottleneck<float>& unit = model.stages[s][u];
        const int c2_out_h = out_extent(h, int(unit.c2.w.shape[2]), unit.c2.stride, unit.c2.pad);
        const int c2_out_ch = int(unit.c2.w.shape[0]);
        if (!unit.attention)
          return {false, fmt("stage %zu unit %zu carries no attention unit", s, u)};
        const AttentionUnit<float>& att = *unit.attention;
        const bool dims_match = att.target_h == c2_out_h && att.target_w == c2_out_h &&
                                att.target_k == c2_out_ch &&
                                int(att.conv.w.shape[0]) == c2_out_ch &&
                                int(att.conv.w.shape[1]) == 3;
        if (!dims_match)
          return {false,
                  fmt("stage %zu unit %zu: attention %dx%dx%d vs second conv %dx%dx%d", s, u,
                      att.target_k, att.target_h, att.target_w, c2_out_ch, c2_out_h, c2_out_h)};
        h = c2_out_h;
        ++audited;
      }
  }
  return {true, fmt("%d bottlenecks audited at 224x224, every attention output matches its "
                    "second conv",
                    audited)};
}

// --- criterion 3: finite-difference gradient suite --------------------------

TensorD random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  TensorD t = TensorD::zeros(std::move(shape));
  for (Eigen::Index i = 0; i < t.numel(); ++i) t.data[i] = lo + (hi - lo) * rng.uniform();
  return t;
}

// gradients of a bottleneck run standalone, parameters gathered by name
Outcome gradient_suite() {
  double worst = 0.0;
  std::vector<std::string> failures;
  auto record = [&](const std::string& name, const GradCheckResult& r) {
    worst = std::max(worst, r.max_rel_err);
    if (!r.ok || r.max_rel_err > 1e-4) failures.push_back(name + ": " + r.worst);
  };

  Rng rng(3000);
  {
    TensorD x = random_tensor({3, 5}, rng), w = random_tensor({5, 2}, rng);
    TensorD b = random_tensor({2}, rng);
    auto model = [](const std::vector<TensorD>& p) {
      Tape<double> tape;
      const int xi = tape.leaf(p[0], true);
      const int wi = tape.leaf(p[1], true);
      const int bi = tape.leaf(p[2], true);
      const int loss = sum(tape, sigmoid(tape, dense(tape, xi, wi, bi)));
      tape.backward(loss);
      return LossAndGrads{tape.value(loss).data[0],
                          {tape.grad(xi), tape.grad(wi), tape.grad(bi)}};
    };
    record("dense", finite_diff_check(model, {x, w, b}));
  }
  {
    TensorD x = random_tensor({2, 3, 5, 5}, rng), w = random_tensor({4, 3, 3, 3}, rng);
    TensorD b = random_tensor({4}, rng);
    auto model = [](const std::vector<TensorD>& p) {
      Tape<double> tape;
      const int xi = tape.leaf(p[0], true);
      const int wi = tape.leaf(p[1], true);
      const int bi = tape.leaf(p[2], true);
      const int loss = sum(tape, sigmoid(tape, conv2d(tape, xi, wi, bi, 2, 1)));
      tape.backward(loss);
      return LossAndGrads{tape.value(loss).data[0],
                          {tape.grad(xi), tape.grad(wi), tape.grad(bi)}};
    };
    record("conv", finite_diff_check(model, {x, w, b}));
  }
  {
    TensorD x = random_tensor({4, 3, 4, 4}, rng), g = random_tensor({3}, rng, 0.5, 1.5);
    TensorD b = random_tensor({3}, rng);
    auto model = [](const std::vector<TensorD>& p) {
      Tape<double> tape;
      BatchNormState<double> state = BatchNormState<double>::init(3);
      const int xi = tape.leaf(p[0], true);
      const int gi = tape.leaf(p[1], true);
      const int bi = tape.leaf(p[2], true);
      const int loss =
          sum(tape, sigmoid(tape, batch_norm(tape, xi, gi, bi, state, RunMode::train)));
      tape.backward(loss);
      return LossAndGrads{tape.value(loss).data[0],
                          {tape.grad(xi), tape.grad(gi), tape.grad(bi)}};
    };
    record("norm", finite_diff_check(model, {x, g, b}));
  }
  {
    Head<double> head;
    head.hidden.push_back({random_tensor({6, 4}, rng), random_tensor({4}, rng)});
    head.out = {random_tensor({4, 1}, rng), random_tensor({1}, rng)};
    head.dropout_rate = 0.0;
    TensorD x = random_tensor({3, 6}, rng);
    TensorD labels = TensorD::from({3, 1}, {1.0, 0.0, 1.0});
    auto model = [&head, &labels](const std::vector<TensorD>& p) {
      Head<double> h = head;
      h.hidden[0].w = p[1];
      h.hidden[0].b = p[2];
      h.out.w = p[3];
      h.out.b = p[4];
      Tape<double> tape;
      Binder<double> binder(tape, true);
      Rng drop(1);
      const int xi = tape.leaf(p[0], true);
      const int prob = head_forward(binder, h, xi, RunMode::train, drop);
      const int loss = bce_loss(tape, prob, labels);
      tape.backward(loss);
      LossAndGrads r;
      r.loss = tape.value(loss).data[0];
      r.grads.push_back(tape.grad(xi));
      for (const auto& e : binder.entries()) r.grads.push_back(tape.grad(e.node));
      return r;
    };
    std::vector<TensorD> params = {x, head.hidden[0].w, head.hidden[0].b, head.out.w,
                                   head.out.b};
    record("head", finite_diff_check(model, params));
  }

  // plain and attention-injected bottlenecks, lifted from an assembled net
  for (const bool with_attention : {false, true}) {
    ModelConfig cfg;
    cfg.layout = {1};
    cfg.stem_channels = 4;
    cfg.input_size = 16;
    cfg.mode = with_attention ? AttentionMode::soft : AttentionMode::none;
    cfg.head_widths = {4};
    cfg.dropout = 0.0;
    Model<double> net = assemble_backbone<double>(cfg, 3100 + (with_attention ? 1 : 0));
    Bottleneck<double>& unit = net.stages[0][0];
    if (with_attention)
      for (Eigen::Index i = 0; i < unit.attention->conv.w.numel(); ++i)
        unit.attention->conv.w.data[i] = 0.3 * (rng.uniform() - 0.5);

    TensorD x = random_tensor({2, 4, 8, 8}, rng);
    TensorD map = random_tensor({2, 3, 16, 16}, rng, 0.0, 1.0);
    std::vector<std::string> names;
    std::vector<TensorD> params = {x};
    net.visit_learned([&](const std::string& n, TensorD& t) {
      if (n.rfind("stage0.unit0.", 0) == 0) {
        names.push_back(n);
        params.push_back(t);
      }
    });

    auto model = [&](const std::vector<TensorD>& p) {
      Model<double> m = net;
      size_t i = 1;
      m.visit_learned([&](const std::string& n, TensorD& t) {
        if (n.rfind("stage0.unit0.", 0) == 0) t = p[i++];
      });
      Tape<double> tape;
      Binder<double> binder(tape, true);
      AttentionContext<double> ctx;
      ctx.map = &map;
      const int xi = tape.leaf(p[0], true);
      const int y = bottleneck_forward(binder, "stage0.unit0", m.stages[0][0], xi,
                                       RunMode::train, with_attention ? &ctx : nullptr);
      const int loss = sum(tape, sigmoid(tape, y));
      tape.backward(loss);
      std::map<std::string, TensorD> by_name;
      for (const auto& e : binder.entries()) by_name[e.name] = tape.grad(e.node);
      LossAndGrads r;
      r.loss = tape.value(loss).data[0];
      r.grads.push_back(tape.grad(xi));
      for (const std::string& n : names) r.grads.push_back(by_name.at(n));
      return r;
    };
    GradCheckOptions opt;
    opt.probes_per_tensor = 6;
    record(with_attention ? "attention bottleneck" : "plain bottleneck",
           finite_diff_check(model, params, opt));
  }

  if (!failures.empty()) return {false, failures.front()};
  return {true, fmt("dense/conv/norm/head/bottleneck/attention all within 1e-4, worst %.2e",
                    worst)};
}

// --- criterion 4: zeroed attention is bit-identical to no attention ---------

Outcome neutrality() {
  ModelConfig soft_cfg;
  soft_cfg.layout = {1, 1};
  soft_cfg.stem_channels = 4;
  soft_cfg.input_size = 16;
  soft_cfg.mode = AttentionMode::soft;
  soft_cfg.head_widths = {8};
  Model<float> soft = assemble_backbone<float>(soft_cfg, 40);
  for (auto& stage : soft.stages)
    for (auto& unit : stage)
      if (unit.attention) {
        unit.attention->conv.w.data.setZero();
        unit.attention->conv.b.data.setZero();
      }

  ModelConfig none_cfg = soft_cfg;
  none_cfg.mode = AttentionMode::none;
  Model<float> none = assemble_backbone<float>(none_cfg, 41);
  copy_matching_params(soft, none);

  Rng rng(42);
  TensorF image = TensorF::zeros({2, 3, 16, 16});
  for (Eigen::Index i = 0; i < image.numel(); ++i) image.data[i] = float(rng.uniform());
  TensorF s = TensorF::zeros({2, 1, 16, 16}), o = TensorF::zeros({2, 1, 16, 16});
  for (Eigen::Index i = 0; i < s.numel(); ++i) s.data[i] = rng.uniform() < 0.4 ? 1.f : 0.f;
  for (Eigen::Index i = 0; i < o.numel(); ++i) o.data[i] = rng.uniform() < 0.4 ? 1.f : 0.f;
  AttentionInput<float> att = build_attention_input(s, o);

  for (RunMode mode : {RunMode::eval, RunMode::train}) {
    Tape<float> ta;
    Binder<float> ba(ta, false);
    Rng ra(77);
    Model<float> soft_copy = soft;
    const TensorF a = ta.value(soft_copy.forward(ba, image, &att, mode, ra));
    Tape<float> tb;
    Binder<float> bb(tb, false);
    Rng rb(77);
    Model<float> none_copy = none;
    const TensorF b = tb.value(none_copy.forward(bb, image, nullptr, mode, rb));
    if (!a.same_shape(b) ||
        std::memcmp(a.ptr(), b.ptr(), sizeof(float) * size_t(a.numel())) != 0)
      return {false, std::string("outputs differ bitwise in ") +
                         (mode == RunMode::eval ? "eval" : "train") + " mode"};
  }
  return {true, "zeroed attention matches the attention-free network bitwise in both run modes"};
}

// --- criterion 5: worked composition example --------------------------------

Outcome worked_example() {
  const TripletConfidence t = compose_triplet(0.98, 0.99, 0.96);
  const double err = std::abs(t.p_joint - 0.931);
  if (err > 1e-3) return {false, fmt("compose_triplet(0.98, 0.99, 0.96) = %.6f", t.p_joint)};
  return {true, fmt("compose_triplet(0.98, 0.99, 0.96) = %.6f, within 1e-3 of 0.931",
                    t.p_joint)};
}

// --- criterion 6: offset sampling respects the overlap floor ----------------

Outcome offset_constraint() {
  const int ch = 24, cw = 24, oh = 10, ow = 10;
  const double floor_frac = 0.55;

  std::map<std::pair<int, int>, long> counts;
  std::vector<std::pair<int, int>> feasible;
  for (int r = -oh + 1; r <= ch - 1; ++r)
    for (int c = -ow + 1; c <= cw - 1; ++c)
      if (overlap_fraction(oh, ow, {r, c}, ch, cw) >= floor_frac) {
        feasible.push_back({r, c});
        counts[{r, c}] = 0;
      }

  const long n = 10000;
  Rng rng(606);
  for (long i = 0; i < n; ++i) {
    const Offset off = sample_offset(rng, oh, ow, ch, cw, floor_frac);
    if (overlap_fraction(oh, ow, off, ch, cw) < floor_frac)
      return {false, fmt("draw %ld at (%d, %d) falls below the 0.55 floor", i, off.row,
                         off.col)};
    auto it = counts.find({off.row, off.col});
    if (it == counts.end())
      return {false, fmt("draw %ld at (%d, %d) lies outside the feasible region", i, off.row,
                         off.col)};
    ++it->second;
  }

  const double expected = double(n) / double(feasible.size());
  double stat = 0.0;
  for (const auto& cell : feasible) {
    const double d = double(counts[cell]) - expected;
    stat += d * d / expected;
  }
  const int df = int(feasible.size()) - 1;
  const double p = testsupport::chi2_sf(stat, df);
  if (p <= 0.01)
    return {false, fmt("chi-square %.1f over %zu cells gives p = %.4f", stat, feasible.size(),
                       p)};
  return {true, fmt("10^4 draws all >= 0.55 overlap; uniform over %zu cells, chi-square p = "
                    "%.3f",
                    feasible.size(), p)};
}

// --- criterion 7: oracle equivalences ---------------------------------------

Outcome oracle_equivalences() {
  // bounding boxes against brute-force min/max scans
  Rng rng(700);
  for (int trial = 0; trial < 1000; ++trial) {
    const int h = 1 + int(rng.uniform_int(0, 23));
    const int w = 1 + int(rng.uniform_int(0, 23));
    BinaryMask m = BinaryMask::zeros(h, w);
    const double density = rng.uniform() * 0.5;
    for (auto& px : m.pixels) px = rng.uniform() < density ? 1 : 0;
    if (m.count() == 0) m.set(int(rng.uniform_int(0, h - 1)), int(rng.uniform_int(0, w - 1)), 1);

    int r0 = h, c0 = w, r1 = -1, c1 = -1;
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        if (m.at(r, c)) {
          r0 = std::min(r0, r);
          c0 = std::min(c0, c);
          r1 = std::max(r1, r);
          c1 = std::max(c1, c);
        }
    BinaryMask filled = BinaryMask::zeros(h, w);
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) filled.set(r, c, 1);

    const auto [box, box_mask] = mask_to_box(m);
    if (box.row0 != r0 || box.col0 != c0 || box.row1 != r1 + 1 || box.col1 != c1 + 1 ||
        !(box_mask == filled))
      return {false, fmt("box trial %d: (%d,%d,%d,%d) vs brute force (%d,%d,%d,%d)", trial,
                         box.row0, box.col0, box.row1, box.col1, r0, c0, r1 + 1, c1 + 1)};
  }

  // trapezoid AUC against quadratic pairwise concordance, ties counted half
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + int(rng.uniform_int(0, 198));
    std::vector<double> scores(static_cast<size_t>(n));
    std::vector<int> labels(static_cast<size_t>(n));
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      scores[size_t(i)] = double(rng.uniform_int(0, 19)) / 19.0;
      labels[size_t(i)] = rng.uniform() < 0.5 ? 1 : 0;
      (labels[size_t(i)] ? has_pos : has_neg) = true;
    }
    if (!has_pos) labels[0] = 1;
    if (!has_neg) labels[size_t(n) - 1] = 0;

    double concordant = 0.0;
    long pairs = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (labels[size_t(i)] == 1 && labels[size_t(j)] == 0) {
          ++pairs;
          if (scores[size_t(i)] > scores[size_t(j)])
            concordant += 1.0;
          else if (scores[size_t(i)] == scores[size_t(j)])
            concordant += 0.5;
        }
    const double oracle = concordant / double(pairs);
    const double auc = roc_curve(scores, labels).auc;
    if (std::abs(auc - oracle) > 1e-12)
      return {false, fmt("auc trial %d: trapezoid %.15f vs concordance %.15f", trial, auc,
                         oracle)};
  }

  // confusion-matrix metrics against direct formula evaluation
  for (int trial = 0; trial < 200; ++trial) {
    ConfusionCounts c;
    c.tp = rng.uniform_int(0, 50);
    c.fp = rng.uniform_int(0, 50);
    c.tn = rng.uniform_int(0, 50);
    c.fn = rng.uniform_int(0, 50);
    const Metrics m = metrics_from(c);
    auto ratio = [](long num, long den) -> std::optional<double> {
      if (den == 0) return std::nullopt;
      return double(num) / double(den);
    };
    const auto accuracy = ratio(c.tp + c.tn, c.tp + c.fp + c.tn + c.fn);
    const auto precision = ratio(c.tp, c.tp + c.fp);
    const auto recall = ratio(c.tp, c.tp + c.fn);
    const auto specificity = ratio(c.tn, c.tn + c.fp);
    std::optional<double> f1;
    if (precision && recall && *precision + *recall > 0.0)
      f1 = 2.0 * *precision * *recall / (*precision + *recall);
    auto same = [](const std::optional<double>& a, const std::optional<double>& b) {
      if (a.has_value() != b.has_value()) return false;
      return !a || std::abs(*a - *b) <= 1e-12;
    };
    if (!same(m.accuracy, accuracy) || !same(m.precision, precision) ||
        !same(m.recall, recall) || !same(m.specificity, specificity) || !same(m.f1, f1))
      return {false, fmt("metrics trial %d: counts %ld/%ld/%ld/%ld disagree with formulas",
                         trial, c.tp, c.fp, c.tn, c.fn)};
  }

  return {true, "boxes, AUC, and metrics match their independent oracles within 1e-12"};
}

// --- criterion 8: end-to-end learning signal --------------------------------

struct LearningRun {
  double soft = 0.0;
  double hard = 0.0;
  double box1 = 0.0;
};

double held_out_accuracy(const ModelConfig& mc, const LoadedDataset& data, uint64_t seed,
                         const TrainConfig& base) {
  TrainConfig tc = base;
  tc.seed = seed;
  Model<float> model = assemble_backbone<float>(mc, seed);
  const TrainResult result = train(std::move(model), data, 1, tc);
  Model<float> last = result.last;
  const EvalReport report = kfold_eval(last, data, 10, 1);
  for (const auto& [name, summary] : report.summary)
    if (name == "accuracy") return summary.mean;
  return -1.0;
}

Outcome learning_signal() {
  GenConfig gen;
  const LoadedDataset data = to_loaded(generate_dataset(gen, 2000, 77, 1));

  TrainConfig base;
  base.epochs = 12;
  base.learning_rate = 3e-3;

  ModelConfig soft_cfg;
  ModelConfig hard_cfg = soft_cfg;
  hard_cfg.mode = AttentionMode::hard;
  ModelConfig box_cfg = soft_cfg;
  box_cfg.mode = AttentionMode::box;
  box_cfg.placement = Placement::first;

  std::vector<LearningRun> runs;
  int ordered = 0;
  double soft_mean = 0.0;
  std::ostringstream rows;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    LearningRun r;
    r.soft = held_out_accuracy(soft_cfg, data, seed, base);
    r.hard = held_out_accuracy(hard_cfg, data, seed, base);
    r.box1 = held_out_accuracy(box_cfg, data, seed, base);
    runs.push_back(r);
    soft_mean += r.soft / 5.0;
    if (r.soft >= r.hard && r.hard >= r.box1) ++ordered;
    rows << fmt(" s%llu %.3f/%.3f/%.3f", (unsigned long long)seed, r.soft, r.hard, r.box1);
  }

  const bool soft_strong = soft_mean >= 0.90;
  if (!soft_strong || ordered < 3)
    return {false, fmt("soft mean %.3f (need >= 0.90), soft>=hard>=box on %d/5 seeds (need "
                       ">= 3);%s",
                       soft_mean, ordered, rows.str().c_str())};
  return {true, fmt("soft mean %.3f held-out, soft>=hard>=box-1-unit on %d/5 seeds;%s",
                    soft_mean, ordered, rows.str().c_str())};
}

// --- criterion 9: stage-level determinism -----------------------------------

Outcome determinism() {
  testsupport::TempDir dir("acceptance-determinism");

  GenConfig gen;
  gen.image_size = 32;
  const auto d1 = dir.path() / "data1";
  const auto d2 = dir.path() / "data2";
  write_dataset(generate_dataset(gen, 150, 9, 1), d1);
  write_dataset(generate_dataset(gen, 150, 9, 1), d2);
  const uint64_t gen_digest = testsupport::fnv1a_tree(d1);
  if (gen_digest != testsupport::fnv1a_tree(d2))
    return {false, "two identical generation runs wrote different trees"};

  const LoadedDataset data = read_dataset(d1);
  ModelConfig mc;
  mc.layout = {1, 1};
  mc.stem_channels = 4;
  mc.input_size = 32;
  mc.head_widths = {16};
  TrainConfig tc;
  tc.epochs = 2;
  tc.learning_rate = 3e-3;
  tc.seed = 5;
  uint64_t train_digest = 0;
  std::string eval_json;
  for (int run = 0; run < 2; ++run) {
    Model<float> model = assemble_backbone<float>(mc, tc.seed);
    const TrainResult result = train(std::move(model), data, 1, tc);
    Model<float> best = result.best;
    const auto out = dir.path() / ("ckpt" + std::to_string(run));
    save_model(best, out);
    const uint64_t digest = testsupport::fnv1a_file(out / "weights.bin");
    const std::string report = report_to_json(kfold_eval(best, data, 10, 1)).dump();
    if (run == 0) {
      train_digest = digest;
      eval_json = report;
    } else if (digest != train_digest) {
      return {false, "two identical training runs produced different weights"};
    } else if (report != eval_json) {
      return {false, "two identical evaluation runs produced different reports"};
    }
  }
  return {true, fmt("generation, training, and evaluation digests repeat exactly "
                    "(data %016llx, weights %016llx)",
                    (unsigned long long)gen_digest, (unsigned long long)train_digest)};
}

// --- criterion 10: fold arithmetic at the published manifest size -----------

Outcome fold_arithmetic() {
  for (const uint64_t seed : {17ull, 99ull}) {
    const std::vector<std::string> splits = assign_splits(5705, seed, 1.0, 10);
    std::map<std::string, long> by_fold;
    for (const std::string& s : splits) ++by_fold[s];
    if (by_fold.count("train"))
      return {false, "full-validation split still assigned training rows"};
    long of571 = 0, of570 = 0;
    for (int f = 1; f <= 10; ++f) {
      const auto it = by_fold.find("val-fold-" + std::to_string(f));
      if (it == by_fold.end()) return {false, fmt("fold %d is empty", f)};
      if (it->second == 571) ++of571;
      if (it->second == 570) ++of570;
    }
    if (by_fold.size() != 10 || of571 != 5 || of570 != 5)
      return {false, fmt("seed %llu: %ld folds of 571 and %ld of 570",
                         (unsigned long long)seed, of571, of570)};
  }
  return {true, "5705 rows split into five folds of 571 and five of 570 for every seed"};
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* name;
    std::function<Outcome()> run;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria = {
      {1, "attention unit counts", unit_counts, 1.0},
      {2, "attention shape law", shape_law, 10.0},
      {3, "gradient suite", gradient_suite, 300.0},
      {4, "attention neutrality", neutrality, 10.0},
      {5, "worked composition example", worked_example, 1.0},
      {6, "offset overlap floor and uniformity", offset_constraint, 30.0},
      {7, "oracle equivalences", oracle_equivalences, 60.0},
      {8, "end-to-end learning signal", learning_signal, 1800.0},
      {9, "stage determinism", determinism, 1800.0},
      {10, "fold arithmetic", fold_arithmetic, 1.0},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = clk::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(clk::now() - t0).count();
    if (outcome.pass && elapsed > c.budget_seconds) {
      outcome.pass = false;
      outcome.detail = fmt("overran the %.0fs budget: %s", c.budget_seconds,
                           outcome.detail.c_str());
    }
    failures += outcome.pass ? 0 : 1;
    std::printf("criterion %2d  %s  %6.1fs  %s: %s\n", c.number,
                outcome.pass ? "PASS" : "FAIL", elapsed, c.name, outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failures);
  return failures == 0 ? 0 : 1;
}
