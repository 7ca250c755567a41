#ifndef LUNGLINE_WEIGHTS_HPP
#define LUNGLINE_WEIGHTS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lungline/arch.hpp"
#include "lungline/tensor.hpp"

namespace lungline::weights {

// Ordered named-tensor bag; the in-memory form of an LWT file.
//
// LWT layout, little-endian throughout:
//   magic "LWTF" (4 B) | format version u32 = 1 | tensor count u32 |
//   per tensor: name length u16 | name bytes | dtype u8 (0 = f32, the only
//   v1 value) | ndim u8 | ndim x extent u32 | raw f32 payload.
struct WeightContainer {
  std::vector<std::pair<std::string, Tensor>> entries;

  // Appends an entry; the name must be new (DuplicateNameError otherwise).
  void add(std::string name, Tensor tensor);

  // nullptr when absent.
  const Tensor* find(const std::string& name) const;

  bool operator==(const WeightContainer&) const = default;
};

std::vector<uint8_t> serialize_lwt(const WeightContainer& container);

// Writes the container to `path`, returning the byte count written.
int64_t save_lwt(const WeightContainer& container, const std::string& path);

WeightContainer load_lwt(std::span<const uint8_t> bytes);

WeightContainer load_lwt(const std::string& path);

// Copies every model parameter from the container, validating full coverage:
// missing names raise BindError listing all of them; shape conflicts raise
// ShapeError naming each tensor with both shapes. Container names the model
// does not own are returned as warnings, not errors. On success the model is
// marked bound.
std::vector<std::string> bind_weights(arch::ModelGraph& model,
                                      const WeightContainer& container);

// The model's current parameters as a container, in graph order.
WeightContainer snapshot(const arch::ModelGraph& model);

// Output extent of the container's "head.weight" entry — how many classes a
// saved classifier emits. BindError when the entry is absent or not rank 2.
int head_classes(const WeightContainer& container);

}  // namespace lungline::weights

#endif  // LUNGLINE_WEIGHTS_HPP
