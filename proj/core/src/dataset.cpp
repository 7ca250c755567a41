#include "lungline/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "lungline/errors.hpp"
#include "lungline/rng.hpp"

namespace lungline::data {

namespace {

bool needs_quoting(const std::string& field) {
  return field.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quoted(const std::string& field) {
  if (!needs_quoting(field)) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// One CSV line into (path, label). Quoted fields follow RFC 4180; a bare
// line splits on its last comma so unquoted paths may contain commas.
std::pair<std::string, std::string> parse_row(const std::string& line,
                                              size_t line_no) {
  auto fail = [&](const std::string& why) -> std::pair<std::string, std::string> {
    throw FormatError("manifest line " + std::to_string(line_no) + ": " + why);
  };
  if (!line.empty() && line.front() == '"') {
    std::string path;
    size_t i = 1;
    for (;; ++i) {
      if (i >= line.size()) return fail("unterminated quoted field");
      if (line[i] == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          path += '"';
          ++i;
        } else {
          break;
        }
      } else {
        path += line[i];
      }
    }
    if (i + 1 >= line.size() || line[i + 1] != ',') {
      return fail("expected comma after quoted path");
    }
    std::string label = line.substr(i + 2);
    if (!label.empty() && label.front() == '"') {
      if (label.size() < 2 || label.back() != '"') {
        return fail("unterminated quoted label");
      }
      std::string inner = label.substr(1, label.size() - 2);
      std::string unescaped;
      for (size_t j = 0; j < inner.size(); ++j) {
        if (inner[j] == '"' && j + 1 < inner.size() && inner[j + 1] == '"') {
          ++j;
        }
        unescaped += inner[j];
      }
      label = unescaped;
    }
    return {path, label};
  }
  const size_t comma = line.rfind(',');
  if (comma == std::string::npos) return fail("expected `path,label`");
  return {line.substr(0, comma), line.substr(comma + 1)};
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::string DatasetManifest::resolve(const Record& rec) const {
  if (base_dir.empty() || (!rec.path.empty() && rec.path.front() == '/')) {
    return rec.path;
  }
  return base_dir + "/" + rec.path;
}

DatasetManifest make_manifest(
    const std::vector<std::pair<std::string, std::string>>& rows) {
  DatasetManifest m;
  std::set<std::string> names;
  std::set<std::string> paths;
  for (const auto& [path, label] : rows) {
    if (path.empty()) throw FormatError("manifest record has an empty path");
    if (label.empty()) {
      throw FormatError("manifest record '" + path + "' has an empty label");
    }
    if (!paths.insert(path).second) {
      throw FormatError("duplicate path '" + path + "' in manifest");
    }
    names.insert(label);
  }
  m.class_names.assign(names.begin(), names.end());  // sorted by set order
  for (const auto& [path, label] : rows) {
    const auto it = std::lower_bound(m.class_names.begin(),
                                     m.class_names.end(), label);
    m.records.push_back(
        {path, static_cast<int>(it - m.class_names.begin())});
  }
  return m;
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError("manifest " + path + " is empty (expected header)");
  }
  if (strip_cr(line) != "path,label") {
    throw FormatError("manifest " + path +
                      ": first line must be `path,label`, got `" + line + "`");
  }
  std::vector<std::pair<std::string, std::string>> rows;
  size_t line_no = 1;
  DatasetManifest m;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      line = strip_cr(line);
      if (line.empty()) continue;
      // An odd number of quotes means a quoted field continues on the next
      // physical line; stitch the record back together before parsing.
      while (std::count(line.begin(), line.end(), '"') % 2 != 0) {
        std::string more;
        if (!std::getline(in, more)) break;  // parse_row reports the defect
        ++line_no;
        line += '\n';
        line += strip_cr(more);
      }
      rows.push_back(parse_row(line, line_no));
    }
    m = make_manifest(rows);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
  // Relative record paths resolve against the manifest's own directory.
  const size_t slash = path.rfind('/');
  m.base_dir = slash == std::string::npos ? "" : path.substr(0, slash);
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest " + path);
  out << "path,label\n";
  for (const Record& rec : manifest.records) {
    if (rec.label < 0 ||
        rec.label >= static_cast<int>(manifest.class_names.size())) {
      throw IndexError("manifest record '" + rec.path +
                       "' has out-of-range label " +
                       std::to_string(rec.label));
    }
    out << quoted(rec.path) << ','
        << quoted(manifest.class_names[static_cast<size_t>(rec.label)])
        << '\n';
  }
  if (!out.flush()) throw IoError("short write to manifest " + path);
}

SplitResult split_dataset(const DatasetManifest& manifest,
                          const SplitSpec& spec) {
  const size_t k = manifest.class_names.size();
  if (spec.per_class.size() != k) {
    throw ArgumentError("split spec covers " +
                        std::to_string(spec.per_class.size()) +
                        " classes, manifest has " + std::to_string(k));
  }
  for (const ClassSplit& c : spec.per_class) {
    if (c.train < 0 || c.val < 0 || c.test < 0) {
      throw ArgumentError("split counts must be >= 0");
    }
  }

  std::vector<std::vector<size_t>> by_class(k);
  for (size_t i = 0; i < manifest.records.size(); ++i) {
    const int label = manifest.records[i].label;
    if (label < 0 || label >= static_cast<int>(k)) {
      throw IndexError("record '" + manifest.records[i].path +
                       "' has out-of-range label " + std::to_string(label));
    }
    by_class[static_cast<size_t>(label)].push_back(i);
  }

  std::string deficit;
  for (size_t c = 0; c < k; ++c) {
    const ClassSplit& want = spec.per_class[c];
    const size_t need = static_cast<size_t>(want.train) +
                        static_cast<size_t>(want.val) +
                        static_cast<size_t>(want.test);
    if (need > by_class[c].size()) {
      if (!deficit.empty()) deficit += "; ";
      deficit += "class '" + manifest.class_names[c] + "' needs " +
                 std::to_string(need) + " records, has " +
                 std::to_string(by_class[c].size());
    }
  }
  if (!deficit.empty()) {
    throw CapacityError("split spec unsatisfiable: " + deficit);
  }

  SplitResult result;
  for (DatasetManifest* part : {&result.train, &result.val, &result.test}) {
    part->class_names = manifest.class_names;
    part->base_dir = manifest.base_dir;
  }
  for (size_t c = 0; c < k; ++c) {
    Rng rng = Rng::for_stream(spec.seed, c);
    rng.shuffle(by_class[c]);
    const ClassSplit& want = spec.per_class[c];
    size_t pos = 0;
    for (int i = 0; i < want.train; ++i) {
      result.train.records.push_back(manifest.records[by_class[c][pos++]]);
    }
    for (int i = 0; i < want.val; ++i) {
      result.val.records.push_back(manifest.records[by_class[c][pos++]]);
    }
    for (int i = 0; i < want.test; ++i) {
      result.test.records.push_back(manifest.records[by_class[c][pos++]]);
    }
  }
  return result;
}

SplitSpec reference_split_spec(const DatasetManifest& manifest,
                               uint64_t seed) {
  struct Row {
    const char* name;
    ClassSplit counts;
  };
  static const Row kReference[] = {
      {"COVID-19", {1000, 100, 100}},
      {"Normal", {1100, 100, 141}},
      {"Viral Pneumonia", {1100, 100, 145}},
  };
  SplitSpec spec;
  spec.seed = seed;
  for (const std::string& name : manifest.class_names) {
    const Row* found = nullptr;
    for (const Row& row : kReference) {
      if (name == row.name) found = &row;
    }
    if (!found) {
      throw ConfigError("no reference split counts for class '" + name +
                        "'; pass explicit per-class counts");
    }
    spec.per_class.push_back(found->counts);
  }
  return spec;
}

std::vector<std::vector<Record>> batches(const DatasetManifest& manifest,
                                         int batch_size, bool shuffle,
                                         uint64_t seed) {
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  std::vector<size_t> order(manifest.records.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (shuffle) {
    Rng rng(seed);
    rng.shuffle(order);
  }
  std::vector<std::vector<Record>> out;
  for (size_t start = 0; start < order.size();
       start += static_cast<size_t>(batch_size)) {
    const size_t stop =
        std::min(order.size(), start + static_cast<size_t>(batch_size));
    std::vector<Record> batch;
    batch.reserve(stop - start);
    for (size_t i = start; i < stop; ++i) {
      batch.push_back(manifest.records[order[i]]);
    }
    out.push_back(std::move(batch));
  }
  return out;
}

}  // namespace lungline::data
