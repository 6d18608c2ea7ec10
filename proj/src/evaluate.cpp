#include "wornet/train/evaluate.hpp"

#include <algorithm>
#include <thread>

namespace wornet {

Tensor<float> image_to_tensor(const Image& image) {
  Tensor<float> t = Tensor<float>::zeros({1, 3, image.height, image.width});
  for (int ch = 0; ch < 3; ++ch)
    for (int r = 0; r < image.height; ++r)
      for (int c = 0; c < image.width; ++c)
        t.at(0, ch, r, c) = float(image.at(r, c, ch)) / 255.0f;
  return t;
}

namespace {

void copy_mask_plane(Tensor<float>& planes, size_t n, const BinaryMask& mask) {
  for (int r = 0; r < mask.height; ++r)
    for (int c = 0; c < mask.width; ++c) planes.at(int(n), 0, r, c) = float(mask.at(r, c));
}

}  // namespace

BatchInputs make_batch(const ModelConfig& cfg, const LoadedDataset& data,
                       const std::vector<size_t>& indices) {
  check(!indices.empty(), "batch must hold at least one record");
  const int S = cfg.input_size;
  const int n = int(indices.size());
  for (size_t i : indices) {
    const Image& img = data.image_of(data.manifest.samples.at(i));
    check(img.height == S && img.width == S,
          "record raster does not match the configured resolution " + std::to_string(S));
  }

  Tensor<float> rgb = Tensor<float>::zeros({n, 3, S, S});
  for (int k = 0; k < n; ++k) {
    const Image& img = data.image_of(data.manifest.samples.at(indices[size_t(k)]));
    for (int ch = 0; ch < 3; ++ch)
      for (int r = 0; r < S; ++r)
        for (int c = 0; c < S; ++c) rgb.at(k, ch, r, c) = float(img.at(r, c, ch)) / 255.0f;
  }

  BatchInputs out{std::move(rgb), std::nullopt};
  if (cfg.mode == AttentionMode::none) return out;

  Tensor<float> s_planes = Tensor<float>::zeros({n, 1, S, S});
  Tensor<float> o_planes = Tensor<float>::zeros({n, 1, S, S});
  for (size_t k = 0; k < indices.size(); ++k) {
    const SampleRecord& rec = data.manifest.samples.at(indices[k]);
    if (cfg.mode == AttentionMode::box) {
      copy_mask_plane(s_planes, k, mask_to_box(rec.s_mask).second);
      copy_mask_plane(o_planes, k, mask_to_box(rec.o_mask).second);
    } else {
      copy_mask_plane(s_planes, k, rec.s_mask);
      copy_mask_plane(o_planes, k, rec.o_mask);
    }
  }

  if (cfg.mode == AttentionMode::hard) {
    out.x = hard_attention_input(out.x, s_planes, o_planes);
    return out;
  }
  out.att = build_attention_input(s_planes, o_planes);
  return out;
}

std::vector<double> score_records(Model<float>& model, const LoadedDataset& data,
                                  const std::vector<size_t>& indices, int batch_size) {
  check(batch_size >= 1, "batch_size must be >= 1");
  std::vector<double> scores;
  scores.reserve(indices.size());
  for (size_t start = 0; start < indices.size(); start += size_t(batch_size)) {
    const size_t stop = std::min(indices.size(), start + size_t(batch_size));
    const std::vector<size_t> chunk(indices.begin() + long(start), indices.begin() + long(stop));
    const BatchInputs batch = make_batch(model.config, data, chunk);

    Tape<float> tape;
    Binder<float> binder(tape, false);
    Rng rng(0);  // eval mode never draws
    const int out = model.forward(binder, batch.x, batch.att ? &*batch.att : nullptr,
                                  RunMode::eval, rng);
    const Tensor<float>& probs = tape.value(out);
    for (size_t k = 0; k < chunk.size(); ++k) {
      double p = double(probs.data[long(k)]);
      p = std::clamp(p, double(kBceClamp), 1.0 - double(kBceClamp));
      scores.push_back(p);
    }
  }
  return scores;
}

std::vector<std::vector<size_t>> fold_partition(const LoadedDataset& data, int k) {
  check(k >= 1, "fold count must be >= 1");
  std::vector<std::vector<size_t>> folds(static_cast<size_t>(k));
  for (size_t i = 0; i < data.manifest.samples.size(); ++i) {
    const std::string& split = data.manifest.samples[i].split;
    for (int f = 1; f <= k; ++f)
      if (split == "val-fold-" + std::to_string(f)) folds[size_t(f - 1)].push_back(i);
  }
  for (int f = 1; f <= k; ++f)
    check(!folds[size_t(f - 1)].empty(),
          "validation fold " + std::to_string(f) + " is missing from the manifest");
  return folds;
}

EvalReport kfold_eval(Model<float>& model, const LoadedDataset& data, int k, int threads) {
  const auto folds = fold_partition(data, k);
  threads = std::clamp(threads, 1, k);

  std::vector<std::vector<double>> fold_scores(folds.size());
  auto run = [&](int first) {
    for (size_t f = size_t(first); f < folds.size(); f += size_t(threads))
      fold_scores[f] = score_records(model, data, folds[f]);
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(run, t);
    for (auto& th : pool) th.join();
  }

  EvalReport report;
  std::vector<double> pooled_scores;
  std::vector<int> pooled_labels;
  for (size_t f = 0; f < folds.size(); ++f) {
    std::vector<int> labels;
    for (size_t i : folds[f]) labels.push_back(data.manifest.samples[i].worn ? 1 : 0);
    FoldMetrics fm;
    fm.fold = int(f) + 1;
    fm.counts = confusion(fold_scores[f], labels, 0.5);
    fm.metrics = metrics_from(fm.counts);
    report.folds.push_back(std::move(fm));
    pooled_scores.insert(pooled_scores.end(), fold_scores[f].begin(), fold_scores[f].end());
    pooled_labels.insert(pooled_labels.end(), labels.begin(), labels.end());
  }
  report.summary = summarize_folds(report.folds);
  report.roc = roc_curve(pooled_scores, pooled_labels);
  return report;
}

}  // namespace wornet
