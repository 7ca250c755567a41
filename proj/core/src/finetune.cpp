#include "lungline/finetune.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "lungline/errors.hpp"
#include "lungline/image.hpp"
#include "lungline/nn.hpp"
#include "lungline/preprocess.hpp"
#include "lungline/rng.hpp"
#include "lungline/util.hpp"

namespace lungline::finetune {

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(cfg.max_lr > 0.0)) throw ConfigError("max_lr must be > 0");
  if (cfg.weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) ||
      !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw ConfigError("betas must lie in [0,1)");
  }
  if (!(cfg.eps > 0.0)) throw ConfigError("eps must be > 0");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) {
    throw ConfigError("dropout must lie in [0,1)");
  }
  if (!(cfg.warmup_frac >= 0.0 && cfg.warmup_frac <= 1.0)) {
    throw ConfigError("warmup_frac must lie in [0,1]");
  }
  if (!(cfg.start_div >= 1.0) || !(cfg.final_div >= 1.0)) {
    throw ConfigError("start_div and final_div must be >= 1");
  }
}

void save_history_csv(const TrainHistory& history, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write history " + path);
  out << "epoch,train_loss,train_acc,val_loss,val_acc,lr\n";
  char buf[256];
  for (size_t e = 0; e < history.size(); ++e) {
    const EpochStats& s = history[e];
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  e + 1, s.train_loss, s.train_acc, s.val_loss, s.val_acc,
                  s.lr);
    out << buf;
  }
  if (!out.flush()) throw IoError("short write to history " + path);
}

void adam_step(const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads, AdamState& state,
               double lr, const TrainConfig& cfg) {
  validate(cfg);
  if (params.size() != grads.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) +
                     " params vs " + std::to_string(grads.size()) + " grads");
  }
  if (state.t == 0 && state.m.empty()) {
    for (const Tensor* p : params) {
      state.m.emplace_back(p->dims());
      state.v.emplace_back(p->dims());
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeError("adam_step: state holds " +
                     std::to_string(state.m.size()) + " moments for " +
                     std::to_string(params.size()) + " params");
  }

  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    if (!p.same_shape(g) || !p.same_shape(m)) {
      throw ShapeError("adam_step: param " + std::to_string(i) + " shape " +
                       p.shape_str() + " does not match grad " +
                       g.shape_str() + " / moment " + m.shape_str());
    }
    float* pp = p.ptr();
    const float* gp = g.ptr();
    float* mp = m.ptr();
    float* vp = v.ptr();
    const int64_t n = p.numel();
    for (int64_t j = 0; j < n; ++j) {
      const double grad =
          static_cast<double>(gp[j]) + cfg.weight_decay * pp[j];
      const double mj = cfg.beta1 * mp[j] + (1.0 - cfg.beta1) * grad;
      const double vj = cfg.beta2 * vp[j] + (1.0 - cfg.beta2) * grad * grad;
      mp[j] = static_cast<float>(mj);
      vp[j] = static_cast<float>(vj);
      const double mhat = mj / bc1;
      const double vhat = vj / bc2;
      pp[j] = static_cast<float>(pp[j] -
                                 lr * mhat / (std::sqrt(vhat) + cfg.eps));
    }
  }
}

double one_cycle_lr(int64_t step, int64_t total_steps, double max_lr,
                    double warmup_frac, double start_div, double final_div) {
  if (total_steps < 1) throw ArgumentError("one_cycle_lr: total_steps < 1");
  if (step < 0 || step >= total_steps) {
    throw ArgumentError("one_cycle_lr: step " + std::to_string(step) +
                        " outside [0," + std::to_string(total_steps) + ")");
  }
  if (!(max_lr > 0.0)) throw ArgumentError("one_cycle_lr: max_lr must be > 0");
  if (!(warmup_frac >= 0.0 && warmup_frac <= 1.0)) {
    throw ArgumentError("one_cycle_lr: warmup_frac outside [0,1]");
  }
  if (!(start_div >= 1.0) || !(final_div >= 1.0)) {
    throw ArgumentError("one_cycle_lr: divisors must be >= 1");
  }

  const double start_lr = max_lr / start_div;
  const double final_lr = max_lr / final_div;
  const int64_t peak = std::clamp<int64_t>(
      std::llround(warmup_frac * static_cast<double>(total_steps)), 0,
      total_steps - 1);
  if (step <= peak) {
    if (peak == 0) return max_lr;
    // Rising half-cosine from start_lr to exactly max_lr at the peak step.
    const double phase =
        M_PI * static_cast<double>(step) / static_cast<double>(peak);
    return max_lr - (max_lr - start_lr) * 0.5 * (1.0 + std::cos(phase));
  }
  // Falling half-cosine, landing exactly on final_lr at the last step.
  const double span = static_cast<double>(total_steps - 1 - peak);
  const double phase = M_PI * static_cast<double>(step - peak) / span;
  return final_lr + (max_lr - final_lr) * 0.5 * (1.0 + std::cos(phase));
}

HeadGradients head_gradients(const Tensor& features, const Tensor& weight,
                             const Tensor& bias,
                             const std::vector<int>& labels) {
  const Tensor logits = nn::linear(features, weight, bias);
  const nn::CrossEntropy ce = nn::cross_entropy(logits, labels);

  const int n = features.dim(0);
  const int f_dim = features.dim(1);
  const int k = weight.dim(0);

  HeadGradients out;
  out.loss = ce.loss;
  out.d_weight = Tensor({k, f_dim});
  out.d_bias = Tensor({k});

  const float* g = ce.grad_logits.ptr();
  const float* x = features.ptr();
  float* dw = out.d_weight.ptr();
  float* db = out.d_bias.ptr();
  for (int c = 0; c < k; ++c) {
    for (int f = 0; f < f_dim; ++f) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += static_cast<double>(g[static_cast<int64_t>(i) * k + c]) *
               x[static_cast<int64_t>(i) * f_dim + f];
      }
      dw[static_cast<int64_t>(c) * f_dim + f] = static_cast<float>(acc);
    }
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += g[static_cast<int64_t>(i) * k + c];
    }
    db[c] = static_cast<float>(acc);
  }

  const std::vector<int> preds = nn::argmax_rows(logits);
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == labels[i]) ++out.correct;
  }
  return out;
}

namespace {

// Rows of `features` selected by `idx`, as a new batch.
Tensor gather_rows(const Tensor& features, const std::vector<size_t>& idx,
                   size_t start, size_t stop) {
  const int f_dim = features.dim(1);
  Tensor out({static_cast<int>(stop - start), f_dim});
  for (size_t i = start; i < stop; ++i) {
    const float* src =
        features.ptr() + static_cast<int64_t>(idx[i]) * f_dim;
    std::copy_n(src, f_dim,
                out.ptr() + static_cast<int64_t>(i - start) * f_dim);
  }
  return out;
}

// Inverted dropout: zero with probability p, scale survivors by 1/(1-p).
void apply_dropout(Tensor& features, double p, Rng& rng) {
  const double keep = 1.0 - p;
  for (float& v : features.data()) {
    if (rng.uniform() < p) {
      v = 0.0f;
    } else {
      v = static_cast<float>(v / keep);
    }
  }
}

struct EvalResult {
  double loss = 0.0;
  double acc = 0.0;
};

EvalResult evaluate_head(const Tensor& features, const Tensor& weight,
                         const Tensor& bias, const std::vector<int>& labels) {
  EvalResult r;
  if (labels.empty()) return r;
  const Tensor logits = nn::linear(features, weight, bias);
  const nn::CrossEntropy ce = nn::cross_entropy(logits, labels);
  const std::vector<int> preds = nn::argmax_rows(logits);
  int64_t correct = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == labels[i]) ++correct;
  }
  r.loss = ce.loss;
  r.acc = static_cast<double>(correct) / static_cast<double>(preds.size());
  return r;
}

}  // namespace

TrainHistory finetune_head_features(Tensor& weight, Tensor& bias,
                                    const Tensor& train_features,
                                    const std::vector<int>& train_labels,
                                    const Tensor& val_features,
                                    const std::vector<int>& val_labels,
                                    const TrainConfig& cfg) {
  validate(cfg);
  if (train_features.rank() != 2 || weight.rank() != 2 || bias.rank() != 1) {
    throw ShapeError("finetune: features must be NxF, head weight KxF, bias K");
  }
  if (weight.dim(1) != train_features.dim(1)) {
    throw ShapeError("finetune: head expects " +
                     std::to_string(weight.dim(1)) + " features, data has " +
                     std::to_string(train_features.dim(1)));
  }
  const int n = train_features.dim(0);
  if (static_cast<int>(train_labels.size()) != n) {
    throw ShapeError("finetune: " + std::to_string(train_labels.size()) +
                     " labels for " + std::to_string(n) + " feature rows");
  }
  // An empty label list means no validation split; val_features is ignored.
  if (!val_labels.empty() &&
      val_features.dim(0) != static_cast<int>(val_labels.size())) {
    throw ShapeError("finetune: validation labels do not match features");
  }
  const int k = weight.dim(0);
  for (int label : train_labels) {
    if (label < 0 || label >= k) {
      throw ConfigError("finetune: label " + std::to_string(label) +
                        " outside the head's " + std::to_string(k) +
                        " classes");
    }
  }

  const int64_t steps_per_epoch =
      (n + cfg.batch_size - 1) / cfg.batch_size;
  const int64_t total_steps = steps_per_epoch * cfg.epochs;

  AdamState state;
  TrainHistory history;
  int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng = Rng::for_stream(cfg.seed, static_cast<uint64_t>(epoch));
    std::vector<size_t> order(static_cast<size_t>(n));
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    double loss_sum = 0.0;
    int64_t correct = 0;
    double last_lr = 0.0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(cfg.batch_size)) {
      const size_t stop = std::min(
          order.size(), start + static_cast<size_t>(cfg.batch_size));
      Tensor batch = gather_rows(train_features, order, start, stop);
      std::vector<int> labels(stop - start);
      for (size_t i = start; i < stop; ++i) {
        labels[i - start] = train_labels[order[i]];
      }
      if (cfg.dropout > 0.0) apply_dropout(batch, cfg.dropout, rng);

      const HeadGradients grads =
          head_gradients(batch, weight, bias, labels);
      last_lr = one_cycle_lr(step, total_steps, cfg.max_lr, cfg.warmup_frac,
                             cfg.start_div, cfg.final_div);
      adam_step({&weight, &bias}, {&grads.d_weight, &grads.d_bias}, state,
                last_lr, cfg);
      ++step;

      loss_sum += static_cast<double>(grads.loss) *
                  static_cast<double>(stop - start);
      correct += grads.correct;
    }

    EpochStats stats;
    stats.train_loss = loss_sum / n;
    stats.train_acc = static_cast<double>(correct) / n;
    const EvalResult val =
        evaluate_head(val_features, weight, bias, val_labels);
    stats.val_loss = val.loss;
    stats.val_acc = val.acc;
    stats.lr = last_lr;
    history.push_back(stats);
  }
  return history;
}

TrainHistory finetune_head(arch::ModelGraph& model,
                           const data::DatasetManifest& train,
                           const data::DatasetManifest& val,
                           const TrainConfig& cfg) {
  validate(cfg);
  if (!model.bound) {
    throw StateError("finetune: model weights are not bound");
  }
  const int k = static_cast<int>(train.class_names.size());
  if (model.num_classes != k) {
    throw ConfigError("finetune: model head has " +
                      std::to_string(model.num_classes) +
                      " classes but the manifest defines " +
                      std::to_string(k));
  }
  if (val.class_names != train.class_names) {
    throw ConfigError(
        "finetune: train and validation manifests disagree on classes");
  }
  if (train.records.empty()) {
    throw ConfigError("finetune: training manifest is empty");
  }

  // The backbone is frozen, so each image's penultimate features are fixed:
  // extract them once, in parallel, delivery slotted by index.
  auto extract = [&](const data::DatasetManifest& manifest) {
    if (manifest.records.empty()) {
      // Placeholder tensor; callers treat an empty label list as "no data".
      return std::make_pair(Tensor({1, model.feature_dim}),
                            std::vector<int>{});
    }
    Tensor features(
        {static_cast<int>(manifest.records.size()), model.feature_dim});
    std::vector<int> labels(manifest.records.size());
    const preprocess::NormalizationSpec norm;
    parallel_for(static_cast<int64_t>(manifest.records.size()),
                 [&](int64_t i) {
                   const data::Record& rec =
                       manifest.records[static_cast<size_t>(i)];
                   const Image img = load_image(manifest.resolve(rec));
                   const Tensor input = preprocess::to_model_input(img, norm);
                   Tensor batch({1, 3, preprocess::kInputSize,
                                 preprocess::kInputSize});
                   std::copy_n(input.ptr(), input.numel(), batch.ptr());
                   const Tensor row = arch::forward_features(model, batch);
                   std::copy_n(row.ptr(), model.feature_dim,
                               features.ptr() + i * model.feature_dim);
                   labels[static_cast<size_t>(i)] = rec.label;
                 });
    return std::make_pair(std::move(features), std::move(labels));
  };

  auto [train_features, train_labels] = extract(train);
  auto [val_features, val_labels] = extract(val);

  Tensor weight = model.params.at("head.weight");
  Tensor bias = model.params.at("head.bias");
  TrainHistory history =
      finetune_head_features(weight, bias, train_features, train_labels,
                             val_features, val_labels, cfg);
  model.params.insert_or_assign("head.weight", std::move(weight));
  model.params.insert_or_assign("head.bias", std::move(bias));
  return history;
}

}  // namespace lungline::finetune
