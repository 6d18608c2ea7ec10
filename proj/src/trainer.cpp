#include "wornet/train/trainer.hpp"

#include <cmath>
#include <map>

namespace wornet {

void validate_config(const TrainConfig& cfg) {
  check(cfg.epochs >= 1, "epochs must be >= 1");
  check(cfg.batch_size >= 1, "batch_size must be >= 1");
  check(cfg.learning_rate > 0.0, "learning_rate must be > 0");
  check(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0, "beta1 must lie in [0, 1)");
  check(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0, "beta2 must lie in [0, 1)");
  check(cfg.eps > 0.0, "eps must be > 0");
}

namespace {

struct AdamSlot {
  Eigen::Array<float, Eigen::Dynamic, 1> m;
  Eigen::Array<float, Eigen::Dynamic, 1> v;
};

constexpr uint64_t kShuffleStream = 0x73687566;
constexpr uint64_t kDropoutStream = 0x64726f70;

}  // namespace

TrainResult train(Model<float> model, const LoadedDataset& data, int val_fold,
                  const TrainConfig& cfg) {
  validate_config(cfg);
  check(!data.manifest.samples.empty(), "dataset holds no samples");

  std::vector<size_t> train_idx, val_idx;
  std::vector<int> val_labels;
  const std::string val_name = "val-fold-" + std::to_string(val_fold);
  for (size_t i = 0; i < data.manifest.samples.size(); ++i) {
    const SampleRecord& rec = data.manifest.samples[i];
    if (rec.split == "train") train_idx.push_back(i);
    if (rec.split == val_name) {
      val_idx.push_back(i);
      val_labels.push_back(rec.worn ? 1 : 0);
    }
  }
  check(!train_idx.empty(), "training split is empty");
  check(!val_idx.empty(),
        "validation fold " + std::to_string(val_fold) + " is missing from the manifest");

  std::map<std::string, AdamSlot> slots;
  long step = 0;
  const float b1 = float(cfg.beta1);
  const float b2 = float(cfg.beta2);
  const float lr = float(cfg.learning_rate);
  const float eps = float(cfg.eps);
  Rng dropout_rng = Rng::derive(cfg.seed, kDropoutStream);

  TrainResult result{model, model, 0, -1.0, {}};
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng = Rng::derive(cfg.seed, kShuffleStream + uint64_t(epoch));
    for (size_t i = train_idx.size() - 1; i > 0; --i)
      std::swap(train_idx[i], train_idx[size_t(shuffle_rng.uniform_int(0, long(i)))]);

    double loss_sum = 0.0;
    for (size_t start = 0; start < train_idx.size(); start += size_t(cfg.batch_size)) {
      const size_t stop = std::min(train_idx.size(), start + size_t(cfg.batch_size));
      const std::vector<size_t> chunk(train_idx.begin() + long(start),
                                      train_idx.begin() + long(stop));
      const BatchInputs batch = make_batch(model.config, data, chunk);
      Tensor<float> labels = Tensor<float>::zeros({int(chunk.size()), 1});
      for (size_t k = 0; k < chunk.size(); ++k)
        labels.data[long(k)] = data.manifest.samples[chunk[k]].worn ? 1.0f : 0.0f;

      Tape<float> tape;
      Binder<float> binder(tape, true);
      const int prob = model.forward(binder, batch.x, batch.att ? &*batch.att : nullptr,
                                     RunMode::train, dropout_rng);
      const int loss = bce_loss(tape, prob, labels);
      tape.backward(loss);
      loss_sum += double(tape.value(loss).data[0]) * double(chunk.size());

      ++step;
      const float c1 = float(1.0 / (1.0 - std::pow(cfg.beta1, double(step))));
      const float c2 = float(1.0 / (1.0 - std::pow(cfg.beta2, double(step))));
      for (const auto& entry : binder.entries()) {
        const Tensor<float> grad = tape.grad(entry.node);
        AdamSlot& slot = slots[entry.name];
        if (slot.m.size() == 0) {
          slot.m = Eigen::Array<float, Eigen::Dynamic, 1>::Zero(grad.data.size());
          slot.v = slot.m;
        }
        slot.m = b1 * slot.m + (1.0f - b1) * grad.data;
        slot.v = b2 * slot.v + (1.0f - b2) * grad.data * grad.data;
        entry.value->data -= lr * (slot.m * c1) / ((slot.v * c2).sqrt() + eps);
      }
    }

    const std::vector<double> scores = score_records(model, data, val_idx, cfg.batch_size);
    const double acc = *metrics_from(confusion(scores, val_labels, 0.5)).accuracy;
    if (acc > result.best_val_accuracy) {
      result.best = model;
      result.best_epoch = epoch;
      result.best_val_accuracy = acc;
    }
    result.history.push_back(
        {epoch, loss_sum / double(train_idx.size()), acc, result.best_val_accuracy});
  }
  result.last = std::move(model);
  return result;
}

}  // namespace wornet
