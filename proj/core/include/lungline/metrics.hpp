#ifndef LUNGLINE_METRICS_HPP
#define LUNGLINE_METRICS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lungline::metrics {

struct ConfusionMatrix {
  int k = 0;
  std::vector<int64_t> counts;  // row = true class, column = predicted

  explicit ConfusionMatrix(int k_ = 0)
      : k(k_), counts(static_cast<size_t>(k_) * static_cast<size_t>(k_), 0) {}

  int64_t& at(int t, int p) {
    return counts[static_cast<size_t>(t) * static_cast<size_t>(k) +
                  static_cast<size_t>(p)];
  }
  int64_t at(int t, int p) const {
    return counts[static_cast<size_t>(t) * static_cast<size_t>(k) +
                  static_cast<size_t>(p)];
  }
  int64_t total() const;
  int64_t trace() const;
};

// One-vs-rest counts for a single class.
struct ClassTally {
  int64_t tp = 0;
  int64_t tn = 0;
  int64_t fn = 0;
  int64_t fp = 0;

  int64_t total() const { return tp + tn + fn + fp; }
};

// Each metric is absent when its ratio is 0/0 — absence is meaningful and is
// never folded into a zero.
struct ClassMetrics {
  std::optional<double> acc;  // (tp+tn)/total
  std::optional<double> pre;  // tp/(tp+fp)
  std::optional<double> rec;  // tp/(tp+fn)
  std::optional<double> f1;   // 2*pre*rec/(pre+rec)
  std::optional<double> mis;  // (fp+fn)/total
  std::optional<double> sen;  // = rec
  std::optional<double> spe;  // tn/(tn+fp)
};

enum class AggregateMode { micro, macro };

struct Summary {
  ClassMetrics values;
  // macro only: per metric name, how many classes were undefined and skipped.
  std::map<std::string, int> excluded;
};

ConfusionMatrix confusion_matrix(const std::vector<int>& preds,
                                 const std::vector<int>& labels, int k);

ClassTally class_tally(const ConfusionMatrix& cm, int c);

ClassMetrics class_metrics(const ClassTally& tally);

// micro: metrics of the pooled one-vs-rest tallies, except accuracy which is
// trace/total (and mis = 1 - acc). macro: unweighted mean over the classes
// where the metric is defined, with exclusions reported.
Summary aggregate(const std::vector<ClassTally>& tallies, AggregateMode mode);
Summary aggregate(const ConfusionMatrix& cm, AggregateMode mode);

}  // namespace lungline::metrics

#endif  // LUNGLINE_METRICS_HPP
