#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <wornet/data/dataset.hpp>
#include <wornet/nn/model.hpp>
#include <wornet/train/metrics.hpp>

namespace wornet {

/// 1×3×H×W float tensor scaled to [0, 1].
Tensor<float> image_to_tensor(const Image& image);

/// Network inputs for a batch of dataset records, assembled to match the
/// model's attention mode: a mask stack for the soft and box modes (box first
/// converts both masks to filled bounding boxes), a five-channel raster for
/// the concatenation mode, and the bare raster otherwise.
struct BatchInputs {
  Tensor<float> x;
  std::optional<AttentionInput<float>> att;
};

BatchInputs make_batch(const ModelConfig& cfg, const LoadedDataset& data,
                       const std::vector<size_t>& indices);

/// Worn probabilities for the given records, in order. A fixed batch size
/// gives bit-reproducible scores, concurrent calls on one frozen model
/// included; different batch sizes agree only to float rounding, since the
/// matrix backend may reorder accumulation with the batch extent.
std::vector<double> score_records(Model<float>& model, const LoadedDataset& data,
                                  const std::vector<size_t>& indices, int batch_size = 16);

/// Record indices of each validation fold 1..k, in manifest order. A fold
/// with no records is rejected.
std::vector<std::vector<size_t>> fold_partition(const LoadedDataset& data, int k);

/// Per-fold confusion metrics at threshold 0.5, mean ± std summaries, and one
/// ROC curve pooled over every validation record. Folds are independent, so
/// any thread count produces the identical report.
EvalReport kfold_eval(Model<float>& model, const LoadedDataset& data, int k = 10,
                      int threads = 1);

}  // namespace wornet
