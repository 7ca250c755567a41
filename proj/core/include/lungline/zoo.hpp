#ifndef LUNGLINE_ZOO_HPP
#define LUNGLINE_ZOO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lungline::zoo {

// One published heavyweight-model row for the footprint comparison. The
// figures are quoted sizes, never recomputed here; rows that left the memory
// column blank carry no value.
struct ReferenceModel {
  std::string comparison;  // "three-class", "covid-normal", "covid-pneumonia"
  std::string name;
  int64_t params = 0;
  std::optional<int64_t> memory_mb;
};

// Every embedded comparison row, grouped by comparison set.
const std::vector<ReferenceModel>& reference_models();

}  // namespace lungline::zoo

#endif  // LUNGLINE_ZOO_HPP
