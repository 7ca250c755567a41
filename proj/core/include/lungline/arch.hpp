#ifndef LUNGLINE_ARCH_HPP
#define LUNGLINE_ARCH_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lungline/tensor.hpp"

namespace lungline::arch {

enum class LayerKind {
  Conv,
  DepthwiseConv,
  BatchNorm,
  Relu6,
  Add,
  GlobalPool,
  Linear,
};

// One node of the (linear) layer list. Layers that own parameters carry a
// name prefix; the parameter names are derived from it:
//   Conv/DepthwiseConv -> prefix.weight            (no bias, batchnorm follows)
//   BatchNorm          -> prefix.{gamma,beta,running_mean,running_var}
//   Linear             -> prefix.{weight,bias}
struct LayerSpec {
  LayerKind kind = LayerKind::Relu6;
  std::string prefix;  // empty for Relu6 / Add / GlobalPool
  int in_ch = 0;
  int out_ch = 0;
  int kernel = 1;
  int stride = 1;
  int padding = 0;
  int groups = 1;
  // Add only: index of the earlier layer whose output is the second addend;
  // -1 means the model input.
  int residual_src = -1;
};

struct ParamCount {
  int64_t trainable = 0;
  int64_t bn_running_stats = 0;
  int64_t total = 0;  // trainable + bn_running_stats
};

// Layer list plus parameter storage. Building initializes every tensor from
// the seed, but a model stays unbound (forward refuses to run) until
// bind_weights marks it bound — initialization is a placeholder, not weights
// anyone should trust.
struct ModelGraph {
  std::vector<LayerSpec> layers;
  std::map<std::string, Tensor> params;
  int num_classes = 0;
  std::array<int, 3> input_shape{3, 224, 224};
  // Per-layer output shape (C,H,W), filled by infer_shapes at build time.
  std::vector<std::array<int, 3>> shapes;
  int feature_dim = 0;  // width entering the linear head
  bool bound = false;

  // Every owned parameter name, graph order. Names are unique by invariant.
  std::vector<std::string> param_names() const;
};

// Parameter names a single layer owns, in canonical order.
std::vector<std::string> layer_param_names(const LayerSpec& layer);

// Expected tensor extents for one named parameter of the layer.
std::vector<int> param_dims(const LayerSpec& layer, const std::string& name);

// Propagates activation shapes through model.layers, validating geometry
// (residual adds require identical shapes; linear must follow a pool).
// Fills model.shapes and model.feature_dim. Throws ShapeError on violations.
void infer_shapes(ModelGraph& model);

// Fills model.params with seeded placeholder values: Kaiming-uniform for
// convolutions (+-sqrt(6/fan_in)), identity stats for batchnorm, and
// +-1/sqrt(fan_in) uniform for the linear head. Each tensor draws from its
// own stream keyed by the parameter name, so init order never matters.
void init_params(ModelGraph& model, uint64_t seed);

// Standard MobileNetV2: stride-2 stem to 32 channels, 17 inverted-residual
// blocks with expansion/channel/repeat/stride settings
// (1,16,1,1),(6,24,2,2),(6,32,3,2),(6,64,4,2),(6,96,3,1),(6,160,3,2),
// (6,320,1,1), a 1x1 conv to 1280, global pool, linear head.
ModelGraph build_mobilenet_v2(int num_classes, float width_mult = 1.0f,
                              uint64_t seed = 0);

// Same graph with a freshly initialized linear head of the new class count;
// all other parameters are copied bit-identically and bound state carries
// over.
ModelGraph replace_head(const ModelGraph& model, int new_num_classes,
                        uint64_t seed = 0);

ParamCount count_params(const ModelGraph& model);

int64_t footprint_bytes(const ParamCount& count, int bytes_per_param = 4);

// Runs the graph on an N,3,224,224 batch, producing N,num_classes logits.
// Requires a bound model (StateError otherwise) and an exact input shape.
Tensor forward(const ModelGraph& model, const Tensor& batch);

// Forward stopped after the global pool: the N,feature_dim activations the
// head consumes. Used by head-only fine-tuning to cache features.
Tensor forward_features(const ModelGraph& model, const Tensor& batch);

}  // namespace lungline::arch

#endif  // LUNGLINE_ARCH_HPP
