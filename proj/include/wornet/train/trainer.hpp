#pragma once

#include <cstdint>
#include <vector>

#include <wornet/train/evaluate.hpp>

namespace wornet {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 16;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  uint64_t seed = 0;

  bool operator==(const TrainConfig&) const = default;
};

void validate_config(const TrainConfig& cfg);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double best_so_far = 0.0;
};

struct TrainResult {
  Model<float> best;
  Model<float> last;
  int best_epoch = 0;
  double best_val_accuracy = 0.0;
  std::vector<EpochStats> history;
};

/// Mini-batch cross-entropy training with adaptive-moment updates. After each
/// epoch the monitored fold is scored at threshold 0.5; the snapshot with the
/// highest accuracy is returned, earliest epoch winning ties. Single-threaded
/// and a pure function of (model, data, cfg).
TrainResult train(Model<float> model, const LoadedDataset& data, int val_fold,
                  const TrainConfig& cfg);

}  // namespace wornet
