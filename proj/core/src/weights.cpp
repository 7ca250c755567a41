#include "lungline/weights.hpp"

#include <bit>
#include <cstring>
#include <set>

#include "lungline/errors.hpp"
#include "lungline/util.hpp"

namespace lungline::weights {

namespace {

constexpr char kMagic[4] = {'L', 'W', 'T', 'F'};
constexpr uint32_t kVersion = 1;
constexpr uint8_t kDtypeF32 = 0;
// Nothing legitimate approaches this; it only guards size arithmetic.
constexpr uint64_t kMaxElements = 1ull << 40;

void append_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void append_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
  }
}

std::string dims_str(const std::vector<int>& dims) {
  std::string s;
  for (size_t i = 0; i < dims.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(dims[i]);
  }
  return s;
}

struct Cursor {
  std::span<const uint8_t> bytes;
  size_t off = 0;

  void need(size_t n, const std::string& what) {
    if (off + n > bytes.size()) {
      throw TruncationError("weight file ends inside " + what, off);
    }
  }
  uint8_t u8(const std::string& what) {
    need(1, what);
    return bytes[off++];
  }
  uint16_t u16(const std::string& what) {
    need(2, what);
    uint16_t v = static_cast<uint16_t>(bytes[off] | (bytes[off + 1] << 8));
    off += 2;
    return v;
  }
  uint32_t u32(const std::string& what) {
    need(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<uint32_t>(bytes[off + static_cast<size_t>(i)])
           << (8 * i);
    }
    off += 4;
    return v;
  }
};

}  // namespace

void WeightContainer::add(std::string name, Tensor tensor) {
  if (find(name)) {
    throw DuplicateNameError("duplicate tensor name '" + name + "'");
  }
  entries.emplace_back(std::move(name), std::move(tensor));
}

const Tensor* WeightContainer::find(const std::string& name) const {
  for (const auto& [n, t] : entries) {
    if (n == name) return &t;
  }
  return nullptr;
}

std::vector<uint8_t> serialize_lwt(const WeightContainer& container) {
  std::vector<uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  append_u32(out, kVersion);
  append_u32(out, static_cast<uint32_t>(container.entries.size()));
  for (const auto& [name, tensor] : container.entries) {
    if (name.size() > 0xffff) {
      throw FormatError("tensor name longer than 65535 bytes");
    }
    append_u16(out, static_cast<uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    out.push_back(kDtypeF32);
    out.push_back(static_cast<uint8_t>(tensor.rank()));
    for (int d = 0; d < tensor.rank(); ++d) {
      append_u32(out, static_cast<uint32_t>(tensor.dim(d)));
    }
    const size_t payload = static_cast<size_t>(tensor.numel()) * 4;
    const size_t pos = out.size();
    out.resize(pos + payload);
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(out.data() + pos, tensor.ptr(), payload);
    } else {
      for (int64_t i = 0; i < tensor.numel(); ++i) {
        const uint32_t v = std::bit_cast<uint32_t>(tensor.ptr()[i]);
        for (int b = 0; b < 4; ++b) {
          out[pos + static_cast<size_t>(i) * 4 + static_cast<size_t>(b)] =
              static_cast<uint8_t>((v >> (8 * b)) & 0xff);
        }
      }
    }
  }
  return out;
}

int64_t save_lwt(const WeightContainer& container, const std::string& path) {
  const std::vector<uint8_t> bytes = serialize_lwt(container);
  write_binary_file(path, bytes.data(), bytes.size());
  return static_cast<int64_t>(bytes.size());
}

WeightContainer load_lwt(std::span<const uint8_t> bytes) {
  Cursor in{bytes};
  in.need(4, "magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("not a weight file: bad magic");
  }
  in.off = 4;
  const uint32_t version = in.u32("format version");
  if (version != kVersion) {
    throw FormatError("unsupported weight format version " +
                      std::to_string(version));
  }
  const uint32_t count = in.u32("tensor count");

  WeightContainer container;
  for (uint32_t e = 0; e < count; ++e) {
    const uint16_t name_len = in.u16("tensor name length");
    in.need(name_len, "tensor name");
    std::string name(reinterpret_cast<const char*>(bytes.data() + in.off),
                     name_len);
    in.off += name_len;

    const uint8_t dtype = in.u8("dtype of '" + name + "'");
    if (dtype != kDtypeF32) {
      throw UnsupportedFormatError("tensor '" + name +
                                   "' has unsupported dtype " +
                                   std::to_string(dtype));
    }
    const uint8_t ndim = in.u8("rank of '" + name + "'");
    if (ndim < 1 || ndim > 4) {
      throw FormatError("tensor '" + name + "' has unsupported rank " +
                        std::to_string(ndim));
    }
    std::vector<int> dims;
    uint64_t numel = 1;
    for (int d = 0; d < ndim; ++d) {
      const uint32_t ext = in.u32("extent of '" + name + "'");
      if (ext == 0 || ext > 0x7fffffffu) {
        throw FormatError("tensor '" + name + "' has invalid extent " +
                          std::to_string(ext));
      }
      numel *= ext;
      if (numel > kMaxElements) {
        throw FormatError("tensor '" + name + "' is implausibly large");
      }
      dims.push_back(static_cast<int>(ext));
    }

    const size_t payload = static_cast<size_t>(numel) * 4;
    in.need(payload, "payload of '" + name + "'");
    std::vector<float> data(static_cast<size_t>(numel));
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(data.data(), bytes.data() + in.off, payload);
    } else {
      for (uint64_t i = 0; i < numel; ++i) {
        uint32_t v = 0;
        for (int b = 0; b < 4; ++b) {
          v |= static_cast<uint32_t>(
                   bytes[in.off + static_cast<size_t>(i) * 4 +
                         static_cast<size_t>(b)])
               << (8 * b);
        }
        data[static_cast<size_t>(i)] = std::bit_cast<float>(v);
      }
    }
    in.off += payload;
    container.add(std::move(name), Tensor(std::move(dims), std::move(data)));
  }

  if (in.off != bytes.size()) {
    throw FormatError("trailing data after last tensor (" +
                      std::to_string(bytes.size() - in.off) +
                      " extra bytes)");
  }
  return container;
}

WeightContainer load_lwt(const std::string& path) {
  const std::vector<uint8_t> bytes = read_binary_file(path);
  return load_lwt(std::span<const uint8_t>(bytes));
}

std::vector<std::string> bind_weights(arch::ModelGraph& model,
                                      const WeightContainer& container) {
  std::vector<std::string> missing;
  std::vector<std::string> conflicts;
  std::set<std::string> expected;
  for (const arch::LayerSpec& layer : model.layers) {
    for (const std::string& name : arch::layer_param_names(layer)) {
      expected.insert(name);
      const Tensor* t = container.find(name);
      if (!t) {
        missing.push_back(name);
        continue;
      }
      const std::vector<int> want = arch::param_dims(layer, name);
      if (t->dims() != want) {
        conflicts.push_back(name + ": model expects " + dims_str(want) +
                            ", container has " + t->shape_str());
      }
    }
  }

  if (!missing.empty()) {
    std::string msg = "weight container is missing " +
                      std::to_string(missing.size()) + " tensor(s):";
    for (const std::string& n : missing) msg += " " + n;
    throw BindError(msg);
  }
  if (!conflicts.empty()) {
    std::string msg = "weight shape conflict";
    if (conflicts.size() > 1) msg += "s";
    for (const std::string& c : conflicts) msg += "; " + c;
    throw ShapeError(msg);
  }

  std::vector<std::string> warnings;
  for (const auto& [name, t] : container.entries) {
    if (!expected.count(name)) {
      warnings.push_back("unused tensor '" + name + "' (" + t.shape_str() +
                         ")");
    }
  }

  for (const arch::LayerSpec& layer : model.layers) {
    for (const std::string& name : arch::layer_param_names(layer)) {
      model.params.insert_or_assign(name, *container.find(name));
    }
  }
  model.bound = true;
  return warnings;
}

WeightContainer snapshot(const arch::ModelGraph& model) {
  WeightContainer container;
  for (const std::string& name : model.param_names()) {
    auto it = model.params.find(name);
    if (it == model.params.end()) {
      throw StateError("model parameter '" + name +
                       "' has no tensor; graph was never initialized");
    }
    container.add(name, it->second);
  }
  return container;
}

int head_classes(const WeightContainer& container) {
  const Tensor* head = container.find("head.weight");
  if (!head || head->rank() != 2) {
    throw BindError(
        "container has no rank-2 'head.weight' tensor; cannot infer the "
        "class count");
  }
  return head->dim(0);
}

}  // namespace lungline::weights
