#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "lungline/arch.hpp"
#include "lungline/dataset.hpp"
#include "lungline/errors.hpp"
#include "lungline/finetune.hpp"
#include "lungline/image.hpp"
#include "lungline/metrics.hpp"
#include "lungline/nn.hpp"
#include "lungline/preprocess.hpp"
#include "lungline/util.hpp"
#include "lungline/weights.hpp"
#include "lungline/zoo.hpp"

namespace lungline::cli {

namespace {

using nlohmann::ordered_json;

struct OutputOpts {
  std::string format = "json";
  std::string out_path;
};

void add_output_opts(CLI::App* cmd, OutputOpts& opts) {
  cmd->add_option("--format", opts.format, "report format")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
  cmd->add_option("--out", opts.out_path,
                  "write the report to this file instead of stdout");
}

void emit(const std::string& text, const OutputOpts& opts) {
  if (opts.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(opts.out_path, std::ios::binary);
  if (!f) throw IoError("cannot write report to " + opts.out_path);
  f << text;
  if (!f.flush()) throw IoError("short write to " + opts.out_path);
}

void emit_json(const ordered_json& j, const OutputOpts& opts) {
  emit(j.dump(2) + "\n", opts);
}

// 3,538,984-style digit grouping for table output.
std::string grouped(int64_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  int count = 0;
  for (size_t i = digits.size(); i-- > 0;) {
    out += digits[i];
    if (++count % 3 == 0 && i > 0 && digits[i - 1] != '-') out += ',';
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::string fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

// Report-table rounding: whole percent per class, one decimal for
// aggregates; undefined metrics render as "-".
std::string pct_int(const std::optional<double>& v) {
  if (!v) return "-";
  return std::to_string(static_cast<long long>(std::llround(*v * 100.0)));
}

std::string pct_1dp(const std::optional<double>& v) {
  if (!v) return "-";
  return fixed1(*v * 100.0);
}

ordered_json opt_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

std::string pad(const std::string& s, size_t width) {
  return s + std::string(s.size() >= width ? 0 : width - s.size(), ' ');
}

std::string lead(const std::string& s, size_t width) {
  return std::string(s.size() >= width ? 0 : width - s.size(), ' ') + s;
}

ordered_json metrics_json(const metrics::ClassMetrics& m) {
  ordered_json j;
  j["acc"] = opt_json(m.acc);
  j["pre"] = opt_json(m.pre);
  j["rec"] = opt_json(m.rec);
  j["f1"] = opt_json(m.f1);
  j["mis"] = opt_json(m.mis);
  j["sen"] = opt_json(m.sen);
  j["spe"] = opt_json(m.spe);
  return j;
}

// Load an LWT file, build the matching classifier, and bind. Binding
// warnings (ignored extra tensors) go to the diagnostic stream.
arch::ModelGraph load_model(const std::string& weights_path) {
  const weights::WeightContainer container = weights::load_lwt(weights_path);
  const int k = weights::head_classes(container);
  arch::ModelGraph model = arch::build_mobilenet_v2(k);
  const std::vector<std::string> warnings =
      weights::bind_weights(model, container);
  for (const std::string& w : warnings) {
    std::cerr << weights_path << ": " << w << "\n";
  }
  return model;
}

Tensor input_batch_of_one(const Tensor& input) {
  Tensor batch({1, input.dim(0), input.dim(1), input.dim(2)});
  std::copy_n(input.ptr(), input.numel(), batch.ptr());
  return batch;
}

// Forward probabilities for every path, parallel per image, results slotted
// by index so worker scheduling cannot reorder anything.
std::vector<std::vector<double>> classify_paths(
    const arch::ModelGraph& model, const std::vector<std::string>& paths) {
  std::vector<std::vector<double>> probs(paths.size());
  const preprocess::NormalizationSpec norm;
  parallel_for(static_cast<int64_t>(paths.size()), [&](int64_t i) {
    const Image img = load_image(paths[static_cast<size_t>(i)]);
    const Tensor input = preprocess::to_model_input(img, norm);
    const Tensor logits = arch::forward(model, input_batch_of_one(input));
    const Tensor p = nn::softmax(logits);
    std::vector<double> row(static_cast<size_t>(p.dim(1)));
    for (int c = 0; c < p.dim(1); ++c) {
      row[static_cast<size_t>(c)] = p.ptr()[c];
    }
    probs[static_cast<size_t>(i)] = std::move(row);
  });
  return probs;
}

std::vector<std::string> split_names(const std::string& csv) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : csv) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// ---------------------------------------------------------------- footprint

struct FootprintArgs {
  std::string arch_name = "mobilenet_v2";
  int classes = 1000;
  double width_mult = 1.0;
  int bytes_per_param = 4;
  bool compare = false;
  std::string comparison = "all";
  OutputOpts out;
};

int run_footprint(const FootprintArgs& a) {
  const arch::ModelGraph model =
      arch::build_mobilenet_v2(a.classes, static_cast<float>(a.width_mult));
  const arch::ParamCount count = arch::count_params(model);
  const int64_t bytes = arch::footprint_bytes(count, a.bytes_per_param);

  std::vector<zoo::ReferenceModel> rows;
  if (a.compare) {
    for (const zoo::ReferenceModel& m : zoo::reference_models()) {
      if (a.comparison == "all" || a.comparison == m.comparison) {
        rows.push_back(m);
      }
    }
  }

  if (a.out.format == "json") {
    ordered_json j;
    j["kind"] = "footprint";
    j["arch"] = a.arch_name;
    j["classes"] = a.classes;
    j["width_mult"] = a.width_mult;
    j["bytes_per_param"] = a.bytes_per_param;
    j["trainable_params"] = count.trainable;
    j["bn_running_stats"] = count.bn_running_stats;
    j["total_params"] = count.total;
    j["bytes"] = bytes;
    j["megabytes"] = static_cast<double>(bytes) / 1e6;
    if (a.compare) {
      ordered_json list = ordered_json::array();
      for (const zoo::ReferenceModel& m : rows) {
        ordered_json row;
        row["name"] = m.name;
        row["comparison"] = m.comparison;
        row["params"] = m.params;
        row["bytes"] = arch::footprint_bytes({0, 0, m.params},
                                             a.bytes_per_param);
        row["memory_mb"] =
            m.memory_mb ? ordered_json(*m.memory_mb) : ordered_json(nullptr);
        row["source"] = "reported";
        list.push_back(row);
      }
      j["compare"] = list;
    }
    emit_json(j, a.out);
    return 0;
  }

  std::string t;
  t += pad("architecture", 18) + a.arch_name + "\n";
  t += pad("classes", 18) + std::to_string(a.classes) + "\n";
  t += pad("width multiplier", 18) + fixed1(a.width_mult) + "\n";
  t += pad("trainable params", 18) + grouped(count.trainable) + "\n";
  t += pad("bn running stats", 18) + grouped(count.bn_running_stats) + "\n";
  t += pad("total params", 18) + grouped(count.total) + "\n";
  t += pad("bytes", 18) + grouped(bytes) + "\n";
  t += pad("megabytes", 18) + fixed1(static_cast<double>(bytes) / 1e6) +
       "\n";
  if (a.compare) {
    t += "\nreported models (" + a.comparison + ")\n";
    t += pad("name", 20) + pad("comparison", 17) + lead("params", 12) +
         lead("bytes", 14) + lead("quoted MB", 11) + "\n";
    for (const zoo::ReferenceModel& m : rows) {
      t += pad(m.name, 20) + pad(m.comparison, 17) +
           lead(grouped(m.params), 12) +
           lead(grouped(arch::footprint_bytes({0, 0, m.params},
                                              a.bytes_per_param)),
                14) +
           lead(m.memory_mb ? std::to_string(*m.memory_mb) : "-", 11) + "\n";
    }
  }
  emit(t, a.out);
  return 0;
}

// -------------------------------------------------------------------- split

struct SplitArgs {
  std::string manifest;
  std::string out_dir = ".";
  uint64_t seed = 0;
  std::vector<std::string> counts;  // "Class=train,val,test"
  OutputOpts out;
};

data::SplitSpec parse_counts(const data::DatasetManifest& manifest,
                             const std::vector<std::string>& counts,
                             uint64_t seed) {
  data::SplitSpec spec;
  spec.seed = seed;
  spec.per_class.resize(manifest.class_names.size());
  std::vector<bool> covered(manifest.class_names.size(), false);
  for (const std::string& item : counts) {
    const size_t eq = item.rfind('=');
    if (eq == std::string::npos) {
      throw ConfigError("--count needs the form CLASS=train,val,test, got '" +
                        item + "'");
    }
    const std::string name = item.substr(0, eq);
    const std::vector<std::string> parts = split_names(item.substr(eq + 1));
    if (parts.size() != 3) {
      throw ConfigError("--count " + name +
                        " needs three comma-separated counts");
    }
    const auto it = std::find(manifest.class_names.begin(),
                              manifest.class_names.end(), name);
    if (it == manifest.class_names.end()) {
      throw ConfigError("--count names unknown class '" + name + "'");
    }
    const size_t idx =
        static_cast<size_t>(it - manifest.class_names.begin());
    try {
      spec.per_class[idx] = {std::stoi(parts[0]), std::stoi(parts[1]),
                             std::stoi(parts[2])};
    } catch (const std::exception&) {
      throw ConfigError("--count " + name + " has non-numeric counts");
    }
    covered[idx] = true;
  }
  std::string missing;
  for (size_t i = 0; i < covered.size(); ++i) {
    if (!covered[i]) {
      if (!missing.empty()) missing += ", ";
      missing += "'" + manifest.class_names[i] + "'";
    }
  }
  if (!missing.empty()) {
    throw ConfigError("--count missing for class(es) " + missing);
  }
  return spec;
}

int run_split(const SplitArgs& a) {
  data::DatasetManifest manifest = data::load_manifest(a.manifest);
  const data::SplitSpec spec =
      a.counts.empty() ? data::reference_split_spec(manifest, a.seed)
                       : parse_counts(manifest, a.counts, a.seed);
  data::SplitResult result = data::split_dataset(manifest, spec);

  // Record paths are rewritten to absolute form so the emitted CSVs resolve
  // no matter where they are loaded from later.
  auto absolutize = [](data::DatasetManifest& m) {
    for (data::Record& rec : m.records) {
      rec.path = std::filesystem::absolute(m.resolve(rec))
                     .lexically_normal()
                     .string();
    }
    m.base_dir.clear();
  };
  absolutize(result.train);
  absolutize(result.val);
  absolutize(result.test);

  std::filesystem::create_directories(a.out_dir);
  const std::string train_path = a.out_dir + "/train.csv";
  const std::string val_path = a.out_dir + "/val.csv";
  const std::string test_path = a.out_dir + "/test.csv";
  data::save_manifest(result.train, train_path);
  data::save_manifest(result.val, val_path);
  data::save_manifest(result.test, test_path);

  if (a.out.format == "json") {
    ordered_json j;
    j["kind"] = "split-summary";
    j["manifest"] = a.manifest;
    j["seed"] = a.seed;
    ordered_json classes = ordered_json::array();
    for (size_t c = 0; c < manifest.class_names.size(); ++c) {
      ordered_json row;
      row["name"] = manifest.class_names[c];
      row["train"] = spec.per_class[c].train;
      row["val"] = spec.per_class[c].val;
      row["test"] = spec.per_class[c].test;
      classes.push_back(row);
    }
    j["classes"] = classes;
    ordered_json totals;
    totals["train"] = result.train.records.size();
    totals["val"] = result.val.records.size();
    totals["test"] = result.test.records.size();
    j["totals"] = totals;
    ordered_json files;
    files["train"] = train_path;
    files["val"] = val_path;
    files["test"] = test_path;
    j["files"] = files;
    emit_json(j, a.out);
    return 0;
  }

  std::string t;
  t += pad("class", 18) + lead("train", 7) + lead("val", 7) + lead("test", 7) +
       "\n";
  for (size_t c = 0; c < manifest.class_names.size(); ++c) {
    t += pad(manifest.class_names[c], 18) +
         lead(std::to_string(spec.per_class[c].train), 7) +
         lead(std::to_string(spec.per_class[c].val), 7) +
         lead(std::to_string(spec.per_class[c].test), 7) + "\n";
  }
  t += pad("total", 18) + lead(std::to_string(result.train.records.size()), 7) +
       lead(std::to_string(result.val.records.size()), 7) +
       lead(std::to_string(result.test.records.size()), 7) + "\n";
  t += "wrote " + train_path + ", " + val_path + ", " + test_path + "\n";
  emit(t, a.out);
  return 0;
}

// ----------------------------------------------------------------- classify

struct ClassifyArgs {
  std::string weights;
  std::vector<std::string> images;
  std::string class_names;  // comma-separated, optional
  OutputOpts out;
};

int run_classify(const ClassifyArgs& a) {
  const arch::ModelGraph model = load_model(a.weights);
  std::vector<std::string> names;
  if (a.class_names.empty()) {
    for (int c = 0; c < model.num_classes; ++c) {
      names.push_back("class_" + std::to_string(c));
    }
  } else {
    names = split_names(a.class_names);
    if (static_cast<int>(names.size()) != model.num_classes) {
      throw ConfigError("--classes lists " + std::to_string(names.size()) +
                        " names but the model has " +
                        std::to_string(model.num_classes) + " classes");
    }
  }

  const std::vector<std::vector<double>> probs =
      classify_paths(model, a.images);

  if (a.out.format == "json") {
    ordered_json j;
    j["kind"] = "classification";
    j["classes"] = names;
    ordered_json items = ordered_json::array();
    for (size_t i = 0; i < a.images.size(); ++i) {
      const std::vector<double>& p = probs[i];
      const size_t best = static_cast<size_t>(
          std::max_element(p.begin(), p.end()) - p.begin());
      ordered_json item;
      item["path"] = a.images[i];
      item["label_index"] = best;
      item["label"] = names[best];
      item["probabilities"] = p;
      items.push_back(item);
    }
    j["items"] = items;
    emit_json(j, a.out);
    return 0;
  }

  size_t path_w = 4;
  for (const std::string& p : a.images) path_w = std::max(path_w, p.size());
  std::string t = pad("path", path_w + 2) + pad("label", 18) +
                  lead("conf%", 7);
  for (const std::string& n : names) t += lead(n + "%", 18);
  t += "\n";
  for (size_t i = 0; i < a.images.size(); ++i) {
    const std::vector<double>& p = probs[i];
    const size_t best = static_cast<size_t>(
        std::max_element(p.begin(), p.end()) - p.begin());
    t += pad(a.images[i], path_w + 2) + pad(names[best], 18) +
         lead(fixed1(p[best] * 100.0), 7);
    for (double v : p) t += lead(fixed1(v * 100.0), 18);
    t += "\n";
  }
  emit(t, a.out);
  return 0;
}

// ----------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string weights;
  std::string manifest;
  std::string mode = "macro";
  OutputOpts out;
};

int run_evaluate(const EvaluateArgs& a) {
  const data::DatasetManifest manifest = data::load_manifest(a.manifest);
  if (manifest.records.empty()) {
    throw ConfigError("manifest " + a.manifest + " has no records");
  }
  const arch::ModelGraph model = load_model(a.weights);
  const int k = static_cast<int>(manifest.class_names.size());
  if (model.num_classes != k) {
    throw ConfigError("model head has " + std::to_string(model.num_classes) +
                      " classes but manifest " + a.manifest + " defines " +
                      std::to_string(k));
  }

  std::vector<std::string> paths;
  std::vector<int> labels;
  for (const data::Record& rec : manifest.records) {
    paths.push_back(manifest.resolve(rec));
    labels.push_back(rec.label);
  }
  const std::vector<std::vector<double>> probs = classify_paths(model, paths);
  std::vector<int> preds(paths.size());
  for (size_t i = 0; i < probs.size(); ++i) {
    preds[i] = static_cast<int>(
        std::max_element(probs[i].begin(), probs[i].end()) -
        probs[i].begin());
  }

  const metrics::ConfusionMatrix cm =
      metrics::confusion_matrix(preds, labels, k);
  const metrics::AggregateMode mode = a.mode == "micro"
                                          ? metrics::AggregateMode::micro
                                          : metrics::AggregateMode::macro;
  const metrics::Summary summary = metrics::aggregate(cm, mode);

  if (a.out.format == "json") {
    ordered_json j;
    j["kind"] = "evaluation";
    j["manifest"] = a.manifest;
    j["mode"] = a.mode;
    j["classes"] = manifest.class_names;
    j["total"] = cm.total();
    j["correct"] = cm.trace();
    ordered_json cm_rows = ordered_json::array();
    for (int t = 0; t < k; ++t) {
      ordered_json row = ordered_json::array();
      for (int p = 0; p < k; ++p) row.push_back(cm.at(t, p));
      cm_rows.push_back(row);
    }
    j["confusion_matrix"] = cm_rows;
    ordered_json per_class = ordered_json::array();
    for (int c = 0; c < k; ++c) {
      const metrics::ClassTally tally = metrics::class_tally(cm, c);
      ordered_json row;
      row["name"] = manifest.class_names[static_cast<size_t>(c)];
      ordered_json tj;
      tj["tp"] = tally.tp;
      tj["tn"] = tally.tn;
      tj["fn"] = tally.fn;
      tj["fp"] = tally.fp;
      row["tally"] = tj;
      row["metrics"] = metrics_json(metrics::class_metrics(tally));
      per_class.push_back(row);
    }
    j["per_class"] = per_class;
    ordered_json agg;
    agg.update(metrics_json(summary.values));
    if (!summary.excluded.empty()) {
      ordered_json ex;
      for (const auto& [name, count] : summary.excluded) ex[name] = count;
      agg["excluded"] = ex;
    }
    j["aggregate"] = agg;
    emit_json(j, a.out);
    return 0;
  }

  size_t name_w = 5;
  for (const std::string& n : manifest.class_names) {
    name_w = std::max(name_w, n.size());
  }
  std::string t = "confusion matrix (rows = true, columns = predicted)\n";
  t += pad("", name_w + 2);
  for (const std::string& n : manifest.class_names) t += lead(n, name_w + 2);
  t += "\n";
  for (int r = 0; r < k; ++r) {
    t += pad(manifest.class_names[static_cast<size_t>(r)], name_w + 2);
    for (int p = 0; p < k; ++p) {
      t += lead(std::to_string(cm.at(r, p)), name_w + 2);
    }
    t += "\n";
  }
  t += "\n" + pad("class", name_w + 2) + lead("ACC%", 6) + lead("PRE%", 6) +
       lead("REC%", 6) + lead("F1%", 6) + lead("MIS%", 6) + lead("SEN%", 6) +
       lead("SPE%", 6) + "\n";
  for (int c = 0; c < k; ++c) {
    const metrics::ClassMetrics m =
        metrics::class_metrics(metrics::class_tally(cm, c));
    t += pad(manifest.class_names[static_cast<size_t>(c)], name_w + 2) +
         lead(pct_int(m.acc), 6) + lead(pct_int(m.pre), 6) +
         lead(pct_int(m.rec), 6) + lead(pct_int(m.f1), 6) +
         lead(pct_int(m.mis), 6) + lead(pct_int(m.sen), 6) +
         lead(pct_int(m.spe), 6) + "\n";
  }
  const metrics::ClassMetrics& v = summary.values;
  t += pad(a.mode, name_w + 2) + lead(pct_1dp(v.acc), 6) +
       lead(pct_1dp(v.pre), 6) + lead(pct_1dp(v.rec), 6) +
       lead(pct_1dp(v.f1), 6) + lead(pct_1dp(v.mis), 6) +
       lead(pct_1dp(v.sen), 6) + lead(pct_1dp(v.spe), 6) + "\n";
  for (const auto& [metric, count] : summary.excluded) {
    t += "note: " + metric + " undefined for " + std::to_string(count) +
         " class(es), excluded from " + a.mode + "\n";
  }
  emit(t, a.out);
  return 0;
}

// ----------------------------------------------------------------- finetune

struct FinetuneArgs {
  std::string weights;
  std::string train_manifest;
  std::string val_manifest;
  std::string out_weights = "finetuned.lwt";
  std::string history_path;
  finetune::TrainConfig cfg;
  OutputOpts out;
};

int run_finetune(const FinetuneArgs& a) {
  finetune::validate(a.cfg);
  const data::DatasetManifest train = data::load_manifest(a.train_manifest);
  data::DatasetManifest val;
  if (a.val_manifest.empty()) {
    val.class_names = train.class_names;  // empty validation split
  } else {
    val = data::load_manifest(a.val_manifest);
  }

  const weights::WeightContainer container = weights::load_lwt(a.weights);
  arch::ModelGraph model =
      arch::build_mobilenet_v2(weights::head_classes(container));
  for (const std::string& w : weights::bind_weights(model, container)) {
    std::cerr << a.weights << ": " << w << "\n";
  }
  const int k = static_cast<int>(train.class_names.size());
  if (model.num_classes != k) {
    model = arch::replace_head(model, k, a.cfg.seed);
  }

  const finetune::TrainHistory history =
      finetune::finetune_head(model, train, val, a.cfg);

  const int64_t bytes = weights::save_lwt(weights::snapshot(model),
                                          a.out_weights);
  if (!a.history_path.empty()) {
    finetune::save_history_csv(history, a.history_path);
  }

  const finetune::EpochStats& last = history.back();
  if (a.out.format == "json") {
    ordered_json j;
    j["kind"] = "finetune";
    j["train_manifest"] = a.train_manifest;
    j["val_manifest"] = a.val_manifest;
    j["classes"] = train.class_names;
    j["epochs"] = a.cfg.epochs;
    j["seed"] = a.cfg.seed;
    j["final"] = {{"train_loss", last.train_loss},
                  {"train_acc", last.train_acc},
                  {"val_loss", last.val_loss},
                  {"val_acc", last.val_acc},
                  {"lr", last.lr}};
    j["weights"] = a.out_weights;
    j["weights_bytes"] = bytes;
    if (!a.history_path.empty()) j["history"] = a.history_path;
    emit_json(j, a.out);
    return 0;
  }

  std::string t;
  t += "trained " + std::to_string(a.cfg.epochs) + " epoch(s) on " +
       std::to_string(train.records.size()) + " images\n";
  t += "final train loss " + fixed1(last.train_loss * 1000.0) +
       "e-3, train acc " + fixed1(last.train_acc * 100.0) + "%";
  if (!val.records.empty()) {
    t += ", val acc " + fixed1(last.val_acc * 100.0) + "%";
  }
  t += "\nwrote " + a.out_weights + " (" + grouped(bytes) + " bytes)";
  if (!a.history_path.empty()) t += " and " + a.history_path;
  t += "\n";
  emit(t, a.out);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{
      "lightweight chest X-ray classifier toolkit: dataset splitting, "
      "head-only transfer training, classification, evaluation, and "
      "model-footprint reports"};
  app.name("lungline");
  app.require_subcommand(0, 1);

  FootprintArgs fp;
  CLI::App* footprint = app.add_subcommand(
      "footprint", "parameter counts and memory of an architecture");
  footprint->add_option("--arch", fp.arch_name, "architecture name")
      ->check(CLI::IsMember({"mobilenet_v2"}))
      ->capture_default_str();
  footprint->add_option("--classes", fp.classes, "classifier head classes")
      ->capture_default_str();
  footprint
      ->add_option("--width-mult", fp.width_mult, "channel width multiplier")
      ->capture_default_str();
  footprint
      ->add_option("--bytes-per-param", fp.bytes_per_param,
                   "bytes per parameter")
      ->capture_default_str();
  footprint->add_flag("--compare", fp.compare,
                      "append the reported heavyweight-model rows");
  footprint
      ->add_option("--comparison", fp.comparison,
                   "which comparison set to append")
      ->check(CLI::IsMember(
          {"all", "three-class", "covid-normal", "covid-pneumonia"}))
      ->capture_default_str();
  add_output_opts(footprint, fp.out);

  SplitArgs sp;
  CLI::App* split = app.add_subcommand(
      "split", "deterministic train/val/test split of a dataset manifest");
  split->add_option("--manifest", sp.manifest, "input CSV (path,label)")
      ->required();
  split->add_option("--out-dir", sp.out_dir, "directory for the three CSVs")
      ->capture_default_str();
  split->add_option("--seed", sp.seed, "shuffle seed")->capture_default_str();
  split->add_option("--count", sp.counts,
                    "per-class counts CLASS=train,val,test (repeatable; "
                    "default: the reference chest X-ray counts)");
  add_output_opts(split, sp.out);

  ClassifyArgs cl;
  CLI::App* classify =
      app.add_subcommand("classify", "classify PNG images with a saved model");
  classify->add_option("--weights,--model", cl.weights, "model weights (.lwt)")
      ->required();
  classify->add_option("images", cl.images, "PNG files to classify")
      ->required()
      ->expected(-1);
  classify->add_option("--classes", cl.class_names,
                       "comma-separated class names for the report");
  add_output_opts(classify, cl.out);

  EvaluateArgs ev;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "confusion matrix and metrics over a labeled manifest");
  evaluate->add_option("--weights,--model", ev.weights, "model weights (.lwt)")
      ->required();
  evaluate->add_option("--manifest", ev.manifest, "labeled CSV (path,label)")
      ->required();
  evaluate->add_option("--mode", ev.mode, "aggregate mode")
      ->check(CLI::IsMember({"micro", "macro"}))
      ->capture_default_str();
  add_output_opts(evaluate, ev.out);

  FinetuneArgs ft;
  CLI::App* finetune_cmd = app.add_subcommand(
      "finetune", "train the classifier head on a labeled manifest");
  finetune_cmd->add_option("--weights", ft.weights, "input weights (.lwt)")
      ->required();
  finetune_cmd->add_option("--train", ft.train_manifest, "training CSV")
      ->required();
  finetune_cmd->add_option("--val", ft.val_manifest, "validation CSV");
  finetune_cmd
      ->add_option("--out-weights", ft.out_weights, "trained weights path")
      ->capture_default_str();
  finetune_cmd->add_option("--history", ft.history_path,
                           "per-epoch history CSV path");
  finetune_cmd->add_option("--epochs", ft.cfg.epochs)->capture_default_str();
  finetune_cmd->add_option("--max-lr", ft.cfg.max_lr)->capture_default_str();
  finetune_cmd->add_option("--weight-decay", ft.cfg.weight_decay)
      ->capture_default_str();
  finetune_cmd->add_option("--batch-size", ft.cfg.batch_size)
      ->capture_default_str();
  finetune_cmd->add_option("--beta1", ft.cfg.beta1)->capture_default_str();
  finetune_cmd->add_option("--beta2", ft.cfg.beta2)->capture_default_str();
  finetune_cmd->add_option("--eps", ft.cfg.eps)->capture_default_str();
  finetune_cmd->add_option("--seed", ft.cfg.seed)->capture_default_str();
  finetune_cmd
      ->add_option("--dropout", ft.cfg.dropout,
                   "feature dropout probability during training")
      ->capture_default_str();
  finetune_cmd->add_option("--warmup-frac", ft.cfg.warmup_frac)
      ->capture_default_str();
  finetune_cmd->add_option("--start-div", ft.cfg.start_div)
      ->capture_default_str();
  finetune_cmd->add_option("--final-div", ft.cfg.final_div)
      ->capture_default_str();
  add_output_opts(finetune_cmd, ft.out);

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("lungline");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n"
              << "run with --help for the command reference\n";
    return 2;
  }

  try {
    if (*footprint) return run_footprint(fp);
    if (*split) return run_split(sp);
    if (*classify) return run_classify(cl);
    if (*evaluate) return run_evaluate(ev);
    if (*finetune_cmd) return run_finetune(ft);
    // No subcommand: print usage, fail as a usage error.
    std::cerr << app.help();
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lungline::cli
