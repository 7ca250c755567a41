#include "lungline/arch.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lungline/errors.hpp"
#include "lungline/nn.hpp"
#include "lungline/rng.hpp"
#include "lungline/util.hpp"

namespace lungline::arch {

namespace {

// Channel rounding used by width multipliers other than 1.0: nearest
// multiple of `divisor`, never dropping more than 10% of the requested width.
int make_divisible(double v, int divisor = 8) {
  int rounded =
      std::max(divisor, (static_cast<int>(v + divisor / 2.0) / divisor) *
                            divisor);
  if (rounded < 0.9 * v) rounded += divisor;
  return rounded;
}

Tensor elementwise_add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("residual add: shape " + a.shape_str() + " vs " +
                     b.shape_str());
  }
  Tensor out(a.dims());
  const float* pa = a.ptr();
  const float* pb = b.ptr();
  float* py = out.ptr();
  const int64_t n = a.numel();
  for (int64_t i = 0; i < n; ++i) py[i] = pa[i] + pb[i];
  return out;
}

void fill_uniform(Tensor& t, Rng& rng, double bound) {
  for (float& v : t.data()) {
    v = static_cast<float>(rng.uniform(-bound, bound));
  }
}

// Walks the layer list up to (exclusive) `stop`, returning the running
// activation. Shared by forward and forward_features.
Tensor run_layers(const ModelGraph& model, const Tensor& batch, size_t stop) {
  std::set<int> needed;
  for (size_t i = 0; i < stop; ++i) {
    if (model.layers[i].kind == LayerKind::Add &&
        model.layers[i].residual_src >= 0) {
      needed.insert(model.layers[i].residual_src);
    }
  }

  Tensor cur = batch;
  std::map<int, Tensor> saved;
  for (size_t i = 0; i < stop; ++i) {
    const LayerSpec& layer = model.layers[i];
    switch (layer.kind) {
      case LayerKind::Conv:
      case LayerKind::DepthwiseConv:
        cur = nn::conv2d(cur, model.params.at(layer.prefix + ".weight"),
                         nullptr, layer.stride, layer.padding, layer.groups);
        break;
      case LayerKind::BatchNorm:
        cur = nn::batchnorm_infer(
            cur, model.params.at(layer.prefix + ".gamma"),
            model.params.at(layer.prefix + ".beta"),
            model.params.at(layer.prefix + ".running_mean"),
            model.params.at(layer.prefix + ".running_var"));
        break;
      case LayerKind::Relu6:
        cur = nn::relu6(cur);
        break;
      case LayerKind::Add:
        cur = elementwise_add(cur, layer.residual_src < 0
                                       ? batch
                                       : saved.at(layer.residual_src));
        break;
      case LayerKind::GlobalPool:
        cur = nn::global_avg_pool(cur);
        break;
      case LayerKind::Linear:
        cur = nn::linear(cur, model.params.at(layer.prefix + ".weight"),
                         model.params.at(layer.prefix + ".bias"));
        break;
    }
    if (needed.count(static_cast<int>(i))) saved[static_cast<int>(i)] = cur;
  }
  return cur;
}

void check_input(const ModelGraph& model, const Tensor& batch,
                 const char* op) {
  if (!model.bound) {
    throw StateError(std::string(op) +
                     ": model weights are not bound (bind a weight container "
                     "before running inference)");
  }
  if (batch.rank() != 4 || batch.dim(1) != model.input_shape[0] ||
      batch.dim(2) != model.input_shape[1] ||
      batch.dim(3) != model.input_shape[2]) {
    throw ShapeError(std::string(op) + ": input " + batch.shape_str() +
                     " does not match Nx" +
                     std::to_string(model.input_shape[0]) + "x" +
                     std::to_string(model.input_shape[1]) + "x" +
                     std::to_string(model.input_shape[2]));
  }
}

}  // namespace

std::vector<std::string> layer_param_names(const LayerSpec& layer) {
  switch (layer.kind) {
    case LayerKind::Conv:
    case LayerKind::DepthwiseConv:
      return {layer.prefix + ".weight"};
    case LayerKind::BatchNorm:
      return {layer.prefix + ".gamma", layer.prefix + ".beta",
              layer.prefix + ".running_mean", layer.prefix + ".running_var"};
    case LayerKind::Linear:
      return {layer.prefix + ".weight", layer.prefix + ".bias"};
    default:
      return {};
  }
}

std::vector<int> param_dims(const LayerSpec& layer, const std::string& name) {
  const bool is_weight = name == layer.prefix + ".weight";
  switch (layer.kind) {
    case LayerKind::Conv:
      return {layer.out_ch, layer.in_ch / layer.groups, layer.kernel,
              layer.kernel};
    case LayerKind::DepthwiseConv:
      return {layer.out_ch, 1, layer.kernel, layer.kernel};
    case LayerKind::BatchNorm:
      return {layer.in_ch};
    case LayerKind::Linear:
      return is_weight ? std::vector<int>{layer.out_ch, layer.in_ch}
                       : std::vector<int>{layer.out_ch};
    default:
      throw ArgumentError("param_dims: layer owns no parameters");
  }
}

std::vector<std::string> ModelGraph::param_names() const {
  std::vector<std::string> names;
  for (const LayerSpec& layer : layers) {
    std::vector<std::string> own = layer_param_names(layer);
    names.insert(names.end(), std::make_move_iterator(own.begin()),
                 std::make_move_iterator(own.end()));
  }
  return names;
}

void infer_shapes(ModelGraph& model) {
  model.shapes.clear();
  model.shapes.reserve(model.layers.size());
  int c = model.input_shape[0], h = model.input_shape[1],
      w = model.input_shape[2];
  bool pooled = false;
  model.feature_dim = 0;

  std::set<std::string> seen;
  for (size_t i = 0; i < model.layers.size(); ++i) {
    const LayerSpec& layer = model.layers[i];
    for (const std::string& n : layer_param_names(layer)) {
      if (!seen.insert(n).second) {
        throw ShapeError("graph: duplicate parameter name " + n);
      }
    }
    if (pooled && layer.kind != LayerKind::Linear) {
      throw ShapeError("graph: only a linear layer may follow the pool");
    }
    switch (layer.kind) {
      case LayerKind::Conv:
      case LayerKind::DepthwiseConv: {
        if (layer.in_ch != c) {
          throw ShapeError("graph: layer " + std::to_string(i) + " (" +
                           layer.prefix + ") expects " +
                           std::to_string(layer.in_ch) + " channels, gets " +
                           std::to_string(c));
        }
        if (layer.kind == LayerKind::DepthwiseConv &&
            (layer.groups != layer.in_ch || layer.out_ch != layer.in_ch)) {
          throw ShapeError("graph: depthwise layer " + layer.prefix +
                           " must have groups = in = out channels");
        }
        if (layer.in_ch % layer.groups != 0 ||
            layer.out_ch % layer.groups != 0) {
          throw ShapeError("graph: layer " + layer.prefix +
                           " channels not divisible by groups");
        }
        const int eff_h = h + 2 * layer.padding;
        const int eff_w = w + 2 * layer.padding;
        if (eff_h < layer.kernel || eff_w < layer.kernel) {
          throw ShapeError("graph: layer " + layer.prefix +
                           " kernel exceeds padded input");
        }
        c = layer.out_ch;
        h = (eff_h - layer.kernel) / layer.stride + 1;
        w = (eff_w - layer.kernel) / layer.stride + 1;
        break;
      }
      case LayerKind::BatchNorm:
        if (layer.in_ch != c) {
          throw ShapeError("graph: batchnorm " + layer.prefix + " expects " +
                           std::to_string(layer.in_ch) + " channels, gets " +
                           std::to_string(c));
        }
        break;
      case LayerKind::Relu6:
        break;
      case LayerKind::Add: {
        if (layer.residual_src < -1 ||
            layer.residual_src >= static_cast<int>(i)) {
          throw ShapeError("graph: residual source " +
                           std::to_string(layer.residual_src) +
                           " out of range for layer " + std::to_string(i));
        }
        const std::array<int, 3> src =
            layer.residual_src < 0
                ? model.input_shape
                : model.shapes[static_cast<size_t>(layer.residual_src)];
        if (src != std::array<int, 3>{c, h, w}) {
          throw ShapeError("graph: residual add at layer " +
                           std::to_string(i) + " joins " +
                           std::to_string(src[0]) + "x" +
                           std::to_string(src[1]) + "x" +
                           std::to_string(src[2]) + " with " +
                           std::to_string(c) + "x" + std::to_string(h) + "x" +
                           std::to_string(w));
        }
        break;
      }
      case LayerKind::GlobalPool:
        model.feature_dim = c;
        h = 1;
        w = 1;
        pooled = true;
        break;
      case LayerKind::Linear:
        if (!pooled) {
          throw ShapeError("graph: linear layer requires pooled features");
        }
        if (layer.in_ch != c) {
          throw ShapeError("graph: linear " + layer.prefix + " expects " +
                           std::to_string(layer.in_ch) + " features, gets " +
                           std::to_string(c));
        }
        c = layer.out_ch;
        break;
    }
    model.shapes.push_back({c, h, w});
  }

  if (!model.layers.empty() &&
      model.layers.back().kind == LayerKind::Linear) {
    const int out = model.layers.back().out_ch;
    if (model.num_classes == 0) {
      model.num_classes = out;
    } else if (model.num_classes != out) {
      throw ShapeError("graph: head emits " + std::to_string(out) +
                       " classes but the model declares " +
                       std::to_string(model.num_classes));
    }
  }
}

void init_params(ModelGraph& model, uint64_t seed) {
  model.params.clear();
  for (const LayerSpec& layer : model.layers) {
    for (const std::string& name : layer_param_names(layer)) {
      Tensor t(param_dims(layer, name));
      if (layer.kind == LayerKind::BatchNorm) {
        const bool ones = name == layer.prefix + ".gamma" ||
                          name == layer.prefix + ".running_var";
        if (ones) t = Tensor::full(t.dims(), 1.0f);
      } else {
        Rng rng = Rng::for_stream(seed, fnv1a64(name));
        double bound;
        if (layer.kind == LayerKind::Linear) {
          bound = 1.0 / std::sqrt(static_cast<double>(layer.in_ch));
        } else {
          const double fan_in = static_cast<double>(t.dim(1)) * layer.kernel *
                                layer.kernel;
          bound = std::sqrt(6.0 / fan_in);
        }
        fill_uniform(t, rng, bound);
      }
      model.params.insert_or_assign(name, std::move(t));
    }
  }
}

ModelGraph build_mobilenet_v2(int num_classes, float width_mult,
                              uint64_t seed) {
  if (num_classes < 2) {
    throw ArgumentError("build_mobilenet_v2: num_classes must be >= 2, got " +
                        std::to_string(num_classes));
  }
  if (!(width_mult > 0.0f)) {
    throw ArgumentError("build_mobilenet_v2: width_mult must be > 0");
  }

  // expansion, channels, repeats, first stride
  static constexpr int kSettings[7][4] = {
      {1, 16, 1, 1},  {6, 24, 2, 2},  {6, 32, 3, 2}, {6, 64, 4, 2},
      {6, 96, 3, 1},  {6, 160, 3, 2}, {6, 320, 1, 1},
  };

  const bool unit_width = width_mult == 1.0f;
  auto scaled = [&](int ch) {
    return unit_width ? ch : make_divisible(static_cast<double>(ch) *
                                            width_mult);
  };
  const int stem_ch = scaled(32);
  const int last_ch =
      unit_width ? 1280
                 : make_divisible(1280.0 * std::max(1.0f, width_mult));

  ModelGraph m;
  m.num_classes = num_classes;

  auto conv = [&](const std::string& prefix, int in, int out, int k, int s,
                  int p, int g) {
    LayerSpec l;
    l.kind = g == in && g > 1 ? LayerKind::DepthwiseConv : LayerKind::Conv;
    l.prefix = prefix;
    l.in_ch = in;
    l.out_ch = out;
    l.kernel = k;
    l.stride = s;
    l.padding = p;
    l.groups = g;
    m.layers.push_back(l);
  };
  auto bn = [&](const std::string& prefix, int ch) {
    LayerSpec l;
    l.kind = LayerKind::BatchNorm;
    l.prefix = prefix;
    l.in_ch = ch;
    l.out_ch = ch;
    m.layers.push_back(l);
  };
  auto relu = [&] { m.layers.push_back(LayerSpec{}); };  // Relu6 default

  conv("stem.conv", 3, stem_ch, 3, 2, 1, 1);
  bn("stem.bn", stem_ch);
  relu();

  int in_ch = stem_ch;
  int block = 1;
  for (const auto& cfg : kSettings) {
    const int expand = cfg[0], repeats = cfg[2];
    const int out_ch = scaled(cfg[1]);
    for (int j = 0; j < repeats; ++j) {
      const int stride = j == 0 ? cfg[3] : 1;
      const std::string p = "block" + std::to_string(block);
      const int hidden = in_ch * expand;
      const int input_layer = static_cast<int>(m.layers.size()) - 1;
      int bn_idx = 1;
      if (expand != 1) {
        conv(p + ".conv", in_ch, hidden, 1, 1, 0, 1);
        bn(p + ".bn" + std::to_string(bn_idx++), hidden);
        relu();
      }
      conv(p + ".dw", hidden, hidden, 3, stride, 1, hidden);
      bn(p + ".bn" + std::to_string(bn_idx++), hidden);
      relu();
      conv(p + ".pw", hidden, out_ch, 1, 1, 0, 1);
      bn(p + ".bn" + std::to_string(bn_idx++), out_ch);
      // Linear bottleneck: no activation after the projection.
      if (stride == 1 && in_ch == out_ch) {
        LayerSpec l;
        l.kind = LayerKind::Add;
        l.residual_src = input_layer;
        m.layers.push_back(l);
      }
      in_ch = out_ch;
      ++block;
    }
  }

  conv("block" + std::to_string(block) + ".conv", in_ch, last_ch, 1, 1, 0, 1);
  bn("block" + std::to_string(block) + ".bn1", last_ch);
  relu();
  {
    LayerSpec l;
    l.kind = LayerKind::GlobalPool;
    m.layers.push_back(l);
  }
  {
    LayerSpec l;
    l.kind = LayerKind::Linear;
    l.prefix = "head";
    l.in_ch = last_ch;
    l.out_ch = num_classes;
    m.layers.push_back(l);
  }

  infer_shapes(m);
  init_params(m, seed);
  return m;
}

ModelGraph replace_head(const ModelGraph& model, int new_num_classes,
                        uint64_t seed) {
  if (new_num_classes < 1) {
    throw ArgumentError("replace_head: class count must be positive");
  }
  size_t head_idx = model.layers.size();
  for (size_t i = model.layers.size(); i-- > 0;) {
    if (model.layers[i].kind == LayerKind::Linear) {
      head_idx = i;
      break;
    }
  }
  if (head_idx == model.layers.size()) {
    throw ArgumentError("replace_head: model has no linear head layer");
  }

  ModelGraph out = model;
  LayerSpec& head = out.layers[head_idx];
  for (const std::string& name : layer_param_names(head)) {
    out.params.erase(name);
  }
  head.out_ch = new_num_classes;
  out.num_classes = new_num_classes;
  out.shapes[head_idx] = {new_num_classes, 1, 1};

  const double bound = 1.0 / std::sqrt(static_cast<double>(head.in_ch));
  for (const std::string& name : layer_param_names(head)) {
    Tensor t(param_dims(head, name));
    Rng rng = Rng::for_stream(seed, fnv1a64(name));
    fill_uniform(t, rng, bound);
    out.params.insert_or_assign(name, std::move(t));
  }
  return out;
}

ParamCount count_params(const ModelGraph& model) {
  ParamCount count;
  for (const LayerSpec& layer : model.layers) {
    for (const std::string& name : layer_param_names(layer)) {
      const int64_t n = checked_numel(param_dims(layer, name));
      const bool running = layer.kind == LayerKind::BatchNorm &&
                           (name == layer.prefix + ".running_mean" ||
                            name == layer.prefix + ".running_var");
      if (running) {
        count.bn_running_stats += n;
      } else {
        count.trainable += n;
      }
    }
  }
  count.total = count.trainable + count.bn_running_stats;
  return count;
}

int64_t footprint_bytes(const ParamCount& count, int bytes_per_param) {
  if (bytes_per_param < 1) {
    throw ArgumentError("footprint_bytes: bytes_per_param must be >= 1");
  }
  return count.total * bytes_per_param;
}

Tensor forward(const ModelGraph& model, const Tensor& batch) {
  check_input(model, batch, "forward");
  Tensor out = run_layers(model, batch, model.layers.size());
  if (out.rank() != 2) {
    throw ShapeError("forward: graph did not end in pooled logits");
  }
  return out;
}

Tensor forward_features(const ModelGraph& model, const Tensor& batch) {
  check_input(model, batch, "forward_features");
  size_t stop = model.layers.size();
  while (stop > 0 && model.layers[stop - 1].kind == LayerKind::Linear) {
    --stop;
  }
  Tensor out = run_layers(model, batch, stop);
  if (out.rank() != 2) {
    throw ShapeError("forward_features: graph has no global pool");
  }
  return out;
}

}  // namespace lungline::arch
