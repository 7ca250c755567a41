#ifndef LUNGLINE_DATASET_HPP
#define LUNGLINE_DATASET_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lungline::data {

struct Record {
  std::string path;
  int label = 0;  // index into DatasetManifest::class_names

  bool operator==(const Record&) const = default;
};

// Immutable record list. class_names carries the label vocabulary in sorted
// order; base_dir (never serialized) is the directory relative record paths
// resolve against.
struct DatasetManifest {
  std::vector<Record> records;
  std::vector<std::string> class_names;
  std::string base_dir;

  // Absolute or base_dir-joined path for one record.
  std::string resolve(const Record& rec) const;
};

// Builds a manifest from (path, class name) pairs; class_names become the
// sorted unique names. Duplicate paths are rejected (FormatError).
DatasetManifest make_manifest(
    const std::vector<std::pair<std::string, std::string>>& rows);

// CSV with header `path,label`, label spelled as the class name. Fields may
// be double-quoted (and then span lines); bare fields split on the last
// comma.
DatasetManifest load_manifest(const std::string& path);

void save_manifest(const DatasetManifest& manifest, const std::string& path);

struct ClassSplit {
  int train = 0;
  int val = 0;
  int test = 0;
};

struct SplitSpec {
  std::vector<ClassSplit> per_class;  // parallel to class_names
  uint64_t seed = 0;
};

struct SplitResult {
  DatasetManifest train;
  DatasetManifest val;
  DatasetManifest test;
};

// Per-class seeded shuffle, then the first train/val/test records of each
// class in shuffle order. Classes with too few records raise CapacityError
// naming every deficient class.
SplitResult split_dataset(const DatasetManifest& manifest,
                          const SplitSpec& spec);

// The chest X-ray reference counts per class name
// (COVID-19 1000/100/100, Normal 1100/100/141, Viral Pneumonia 1100/100/145),
// matched against the manifest's class_names. Unknown names raise
// ConfigError — pass explicit counts for custom datasets.
SplitSpec reference_split_spec(const DatasetManifest& manifest, uint64_t seed);

// ceil(n/batch_size) batches; the last may be short. With shuffle the order
// is a seeded permutation, otherwise manifest order.
std::vector<std::vector<Record>> batches(const DatasetManifest& manifest,
                                         int batch_size, bool shuffle,
                                         uint64_t seed);

}  // namespace lungline::data

#endif  // LUNGLINE_DATASET_HPP
