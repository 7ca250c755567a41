#include "lungline/metrics.hpp"

#include "lungline/errors.hpp"

namespace lungline::metrics {

namespace {

std::optional<double> ratio(int64_t num, int64_t denom) {
  if (denom == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(denom);
}

// Mean of the defined values; records how many were skipped.
std::optional<double> macro_mean(
    const std::vector<ClassMetrics>& per_class,
    std::optional<double> ClassMetrics::*field, const char* name,
    std::map<std::string, int>& excluded) {
  double sum = 0.0;
  int defined = 0;
  for (const ClassMetrics& m : per_class) {
    if ((m.*field).has_value()) {
      sum += *(m.*field);
      ++defined;
    }
  }
  const int skipped = static_cast<int>(per_class.size()) - defined;
  if (skipped > 0) excluded[name] = skipped;
  if (defined == 0) return std::nullopt;
  return sum / defined;
}

}  // namespace

int64_t ConfusionMatrix::total() const {
  int64_t t = 0;
  for (int64_t c : counts) t += c;
  return t;
}

int64_t ConfusionMatrix::trace() const {
  int64_t t = 0;
  for (int i = 0; i < k; ++i) t += at(i, i);
  return t;
}

ConfusionMatrix confusion_matrix(const std::vector<int>& preds,
                                 const std::vector<int>& labels, int k) {
  if (k < 1) throw ArgumentError("confusion matrix needs k >= 1 classes");
  if (preds.size() != labels.size()) {
    throw ArgumentError("prediction count " + std::to_string(preds.size()) +
                        " != label count " + std::to_string(labels.size()));
  }
  ConfusionMatrix cm(k);
  for (size_t i = 0; i < preds.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k || preds[i] < 0 || preds[i] >= k) {
      throw ArgumentError("class index out of range at sample " +
                          std::to_string(i) + " (label " +
                          std::to_string(labels[i]) + ", prediction " +
                          std::to_string(preds[i]) + ", k=" +
                          std::to_string(k) + ")");
    }
    ++cm.at(labels[i], preds[i]);
  }
  return cm;
}

ClassTally class_tally(const ConfusionMatrix& cm, int c) {
  if (c < 0 || c >= cm.k) {
    throw IndexError("class index " + std::to_string(c) +
                     " out of range [0," + std::to_string(cm.k) + ")");
  }
  ClassTally t;
  t.tp = cm.at(c, c);
  for (int p = 0; p < cm.k; ++p) {
    if (p != c) t.fn += cm.at(c, p);  // true c, predicted elsewhere
  }
  for (int r = 0; r < cm.k; ++r) {
    if (r != c) t.fp += cm.at(r, c);  // predicted c, truly elsewhere
  }
  t.tn = cm.total() - t.tp - t.fn - t.fp;
  return t;
}

ClassMetrics class_metrics(const ClassTally& tally) {
  if (tally.tp < 0 || tally.tn < 0 || tally.fn < 0 || tally.fp < 0) {
    throw ArgumentError("tally counts must be >= 0");
  }
  const int64_t total = tally.total();
  if (total == 0) throw ArgumentError("tally is empty (total = 0)");

  ClassMetrics m;
  m.acc = ratio(tally.tp + tally.tn, total);
  m.mis = ratio(tally.fp + tally.fn, total);
  m.pre = ratio(tally.tp, tally.tp + tally.fp);
  m.rec = ratio(tally.tp, tally.tp + tally.fn);
  m.sen = m.rec;
  m.spe = ratio(tally.tn, tally.tn + tally.fp);
  if (m.pre && m.rec && *m.pre + *m.rec > 0.0) {
    m.f1 = 2.0 * *m.pre * *m.rec / (*m.pre + *m.rec);
  }
  return m;
}

Summary aggregate(const std::vector<ClassTally>& tallies,
                  AggregateMode mode) {
  if (tallies.empty()) {
    throw ArgumentError("aggregate needs at least one class");
  }

  Summary out;
  if (mode == AggregateMode::micro) {
    ClassTally pooled;
    for (const ClassTally& t : tallies) {
      pooled.tp += t.tp;
      pooled.tn += t.tn;
      pooled.fn += t.fn;
      pooled.fp += t.fp;
    }
    out.values = class_metrics(pooled);
    // Multi-class accuracy is the fraction of correctly classified samples,
    // not the pooled one-vs-rest ratio: trace/total, with each class tally
    // covering the same sample count.
    const int64_t samples = tallies.front().total();
    int64_t trace = 0;
    for (const ClassTally& t : tallies) trace += t.tp;
    out.values.acc = ratio(trace, samples);
    out.values.mis = 1.0 - *out.values.acc;
  } else {
    std::vector<ClassMetrics> per_class;
    per_class.reserve(tallies.size());
    for (const ClassTally& t : tallies) per_class.push_back(class_metrics(t));
    out.values.acc =
        macro_mean(per_class, &ClassMetrics::acc, "acc", out.excluded);
    out.values.pre =
        macro_mean(per_class, &ClassMetrics::pre, "pre", out.excluded);
    out.values.rec =
        macro_mean(per_class, &ClassMetrics::rec, "rec", out.excluded);
    out.values.f1 =
        macro_mean(per_class, &ClassMetrics::f1, "f1", out.excluded);
    out.values.mis =
        macro_mean(per_class, &ClassMetrics::mis, "mis", out.excluded);
    out.values.sen =
        macro_mean(per_class, &ClassMetrics::sen, "sen", out.excluded);
    out.values.spe =
        macro_mean(per_class, &ClassMetrics::spe, "spe", out.excluded);
  }
  return out;
}

Summary aggregate(const ConfusionMatrix& cm, AggregateMode mode) {
  if (cm.k < 1) throw ArgumentError("aggregate needs at least one class");
  std::vector<ClassTally> tallies;
  tallies.reserve(static_cast<size_t>(cm.k));
  for (int c = 0; c < cm.k; ++c) tallies.push_back(class_tally(cm, c));
  return aggregate(tallies, mode);
}

}  // namespace lungline::metrics
