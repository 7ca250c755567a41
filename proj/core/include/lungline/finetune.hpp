#ifndef LUNGLINE_FINETUNE_HPP
#define LUNGLINE_FINETUNE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "lungline/arch.hpp"
#include "lungline/dataset.hpp"
#include "lungline/tensor.hpp"

namespace lungline::finetune {

struct TrainConfig {
  int epochs = 30;
  double max_lr = 1e-4;
  double weight_decay = 1e-4;
  int batch_size = 32;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  uint64_t seed = 0;
  // Feature dropout before the head during training only; 0 disables.
  double dropout = 0.0;
  // One-cycle schedule shape: fraction of steps spent warming up, and the
  // divisors giving the start and final rates relative to max_lr.
  double warmup_frac = 0.3;
  double start_div = 25.0;
  double final_div = 1e4;
};

// ConfigError on out-of-domain fields.
void validate(const TrainConfig& cfg);

struct EpochStats {
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double lr = 0.0;  // rate of the epoch's last optimizer step
};
using TrainHistory = std::vector<EpochStats>;

// `epoch,train_loss,train_acc,val_loss,val_acc,lr`, epochs 1-based.
void save_history_csv(const TrainHistory& history, const std::string& path);

// Adam moment buffers, parallel to the parameter list passed to adam_step.
// A fresh (t = 0) state lazily allocates zero moments on first use.
struct AdamState {
  int64_t t = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

// One coupled-L2 Adam update over `params` in place: g' = g + wd*p, moment
// updates with bias correction, p -= lr * mhat / (sqrt(vhat) + eps).
void adam_step(const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads, AdamState& state,
               double lr, const TrainConfig& cfg);

// Cosine one-cycle rate for 0 <= step < total_steps: max_lr/start_div up to
// max_lr over the first warmup_frac of steps, back down to max_lr/final_div.
double one_cycle_lr(int64_t step, int64_t total_steps, double max_lr,
                    double warmup_frac = 0.3, double start_div = 25.0,
                    double final_div = 1e4);

struct HeadGradients {
  float loss = 0.0f;
  Tensor d_weight;    // same shape as the head weight
  Tensor d_bias;      // same shape as the head bias
  int64_t correct = 0;  // argmax hits, for accuracy bookkeeping
};

// Loss and analytic gradients of mean cross-entropy through the linear head:
// with G the logit gradient, dW = G^T * features and db = column sums of G.
HeadGradients head_gradients(const Tensor& features, const Tensor& weight,
                             const Tensor& bias,
                             const std::vector<int>& labels);

// The training loop on precomputed penultimate features. Updates weight and
// bias in place; returns one EpochStats per epoch. Deterministic in
// (weight, bias, features, labels, cfg.seed).
TrainHistory finetune_head_features(Tensor& weight, Tensor& bias,
                                    const Tensor& train_features,
                                    const std::vector<int>& train_labels,
                                    const Tensor& val_features,
                                    const std::vector<int>& val_labels,
                                    const TrainConfig& cfg);

// Full pipeline: extracts features for both manifests through the frozen
// backbone (parallel per image, order-independent), then trains the head.
// Only head.weight / head.bias change; every other tensor stays bit-equal.
TrainHistory finetune_head(arch::ModelGraph& model,
                           const data::DatasetManifest& train,
                           const data::DatasetManifest& val,
                           const TrainConfig& cfg);

}  // namespace lungline::finetune

#endif  // LUNGLINE_FINETUNE_HPP
