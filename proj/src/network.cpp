#include "slimnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "slimnet/detail/json_util.hpp"
#include "slimnet/errors.hpp"

namespace slimnet {

namespace {

using detail::ordered_json;

std::size_t flat_size(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string layer_label(std::size_t index, LayerKind kind) {
    return "layer " + std::to_string(index) + " (" + to_string(kind) + ")";
}

}  // namespace

const char* to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::dense: return "dense";
        case LayerKind::conv1d_vertical: return "conv1d_vertical";
        case LayerKind::conv1d_horizontal: return "conv1d_horizontal";
        case LayerKind::max_pool: return "max_pool";
        case LayerKind::relu: return "relu";
        case LayerKind::classifier: return "classifier";
    }
    return "?";
}

const char* to_string(LossKind loss) {
    switch (loss) {
        case LossKind::cross_entropy: return "cross_entropy";
        case LossKind::squared_error: return "squared_error";
    }
    return "?";
}

LayerSpec LayerSpec::dense_layer(std::size_t neurons) {
    LayerSpec s;
    s.kind = LayerKind::dense;
    s.neurons = neurons;
    return s;
}

LayerSpec LayerSpec::conv_vertical(std::size_t neurons, std::size_t d, std::size_t stride, std::size_t padding) {
    LayerSpec s;
    s.kind = LayerKind::conv1d_vertical;
    s.neurons = neurons;
    s.kernel_extent = d;
    s.stride = stride;
    s.padding = padding;
    return s;
}

LayerSpec LayerSpec::conv_horizontal(std::size_t neurons, std::size_t d, std::size_t stride, std::size_t padding) {
    LayerSpec s = conv_vertical(neurons, d, stride, padding);
    s.kind = LayerKind::conv1d_horizontal;
    return s;
}

LayerSpec LayerSpec::pool(std::size_t window, std::size_t stride) {
    LayerSpec s;
    s.kind = LayerKind::max_pool;
    s.window = window;
    s.stride = stride;
    return s;
}

LayerSpec LayerSpec::activation() {
    LayerSpec s;
    s.kind = LayerKind::relu;
    return s;
}

LayerSpec LayerSpec::classifier_layer(std::size_t classes) {
    LayerSpec s;
    s.kind = LayerKind::classifier;
    s.neurons = classes;
    return s;
}

// ---------------------------------------------------------------------------
// JSON round trip
// ---------------------------------------------------------------------------

namespace {

void append_layer_from_json(std::vector<LayerSpec>& out, const ordered_json& j, std::size_t index) {
    const std::string path = "network.layers[" + std::to_string(index) + "]";
    detail::require_object(j, path);
    const std::string kind = detail::get_string(j, "kind", path);

    if (kind == "dense" || kind == "classifier") {
        detail::reject_unknown_keys(j, {"kind", "neurons"}, path);
        const std::size_t n = detail::get_size(j, "neurons", path);
        if (n == 0) throw ConfigError(path + ".neurons: must be positive");
        out.push_back(kind == "dense" ? LayerSpec::dense_layer(n) : LayerSpec::classifier_layer(n));
    } else if (kind == "conv1d_vertical" || kind == "conv1d_horizontal") {
        detail::reject_unknown_keys(j, {"kind", "neurons", "kernel_extent", "stride", "padding"}, path);
        const std::size_t n = detail::get_size(j, "neurons", path);
        const std::size_t d = detail::get_size(j, "kernel_extent", path);
        const std::size_t stride = detail::get_size_or(j, "stride", 1, path);
        const std::size_t padding = detail::get_size_or(j, "padding", 0, path);
        if (n == 0) throw ConfigError(path + ".neurons: must be positive");
        if (d == 0) throw ConfigError(path + ".kernel_extent: must be positive");
        if (stride == 0) throw ConfigError(path + ".stride: must be positive");
        out.push_back(kind == "conv1d_vertical" ? LayerSpec::conv_vertical(n, d, stride, padding)
                                                : LayerSpec::conv_horizontal(n, d, stride, padding));
    } else if (kind == "max_pool") {
        detail::reject_unknown_keys(j, {"kind", "window", "stride"}, path);
        const std::size_t window = detail::get_size(j, "window", path);
        if (window == 0) throw ConfigError(path + ".window: must be positive");
        const std::size_t stride = detail::get_size_or(j, "stride", window, path);
        if (stride == 0) throw ConfigError(path + ".stride: must be positive");
        out.push_back(LayerSpec::pool(window, stride));
    } else if (kind == "relu") {
        detail::reject_unknown_keys(j, {"kind"}, path);
        out.push_back(LayerSpec::activation());
    } else if (kind == "decomposed_pair") {
        // Sugar for the split form of a 2-D convolution: a vertical stage of
        // shared filters feeding a horizontal stage, ReLU after each.
        detail::reject_unknown_keys(j, {"kind", "shared_filters", "neurons", "kernel_extent", "stride", "padding"},
                                    path);
        const std::size_t shared = detail::get_size(j, "shared_filters", path);
        const std::size_t n = detail::get_size(j, "neurons", path);
        const std::size_t d = detail::get_size(j, "kernel_extent", path);
        const std::size_t stride = detail::get_size_or(j, "stride", 1, path);
        const std::size_t padding = detail::get_size_or(j, "padding", 0, path);
        if (shared == 0) throw ConfigError(path + ".shared_filters: must be positive");
        if (n == 0) throw ConfigError(path + ".neurons: must be positive");
        if (d == 0) throw ConfigError(path + ".kernel_extent: must be positive");
        if (stride == 0) throw ConfigError(path + ".stride: must be positive");
        out.push_back(LayerSpec::conv_vertical(shared, d, stride, padding));
        out.push_back(LayerSpec::activation());
        out.push_back(LayerSpec::conv_horizontal(n, d, stride, padding));
        out.push_back(LayerSpec::activation());
    } else {
        throw ConfigError(path + ".kind: unknown layer kind '" + kind + "'");
    }
}

ordered_json layer_to_json(const LayerSpec& layer) {
    ordered_json j;
    j["kind"] = to_string(layer.kind);
    switch (layer.kind) {
        case LayerKind::dense:
        case LayerKind::classifier:
            j["neurons"] = layer.neurons;
            break;
        case LayerKind::conv1d_vertical:
        case LayerKind::conv1d_horizontal:
            j["neurons"] = layer.neurons;
            j["kernel_extent"] = layer.kernel_extent;
            j["stride"] = layer.stride;
            j["padding"] = layer.padding;
            break;
        case LayerKind::max_pool:
            j["window"] = layer.window;
            j["stride"] = layer.stride;
            break;
        case LayerKind::relu:
            break;
    }
    return j;
}

}  // namespace

NetworkSpec NetworkSpec::from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("network: invalid JSON: ") + e.what());
    }
    detail::reject_unknown_keys(j, {"input_shape", "layers", "loss"}, "network");

    NetworkSpec spec;
    const auto& shape = detail::require_field(j, "input_shape", "network");
    if (!shape.is_array() || shape.empty()) throw ConfigError("network.input_shape: expected a non-empty array");
    for (const auto& v : shape) {
        if (!v.is_number_integer() || v.get<std::int64_t>() <= 0) {
            throw ConfigError("network.input_shape: extents must be positive integers");
        }
        spec.input_shape.push_back(v.get<std::size_t>());
    }
    if (spec.input_shape.size() != 1 && spec.input_shape.size() != 3) {
        throw ConfigError("network.input_shape: expected rank 1 or 3, got rank " +
                          std::to_string(spec.input_shape.size()));
    }

    const auto& layers = detail::require_field(j, "layers", "network");
    if (!layers.is_array()) throw ConfigError("network.layers: expected an array");
    for (std::size_t i = 0; i < layers.size(); ++i) append_layer_from_json(spec.layers, layers.at(i), i);

    if (j.contains("loss")) {
        const std::string loss = detail::get_string(j, "loss", "network");
        if (loss == "cross_entropy") {
            spec.loss = LossKind::cross_entropy;
        } else if (loss == "squared_error") {
            spec.loss = LossKind::squared_error;
        } else {
            throw ConfigError("network.loss: unknown loss '" + loss + "'");
        }
    }
    return spec;
}

std::string NetworkSpec::to_json() const {
    ordered_json j;
    j["input_shape"] = input_shape;
    j["layers"] = ordered_json::array();
    for (const auto& layer : layers) j["layers"].push_back(layer_to_json(layer));
    j["loss"] = to_string(loss);
    return j.dump();
}

void NetworkSpec::validate_for_training() const {
    std::size_t classifiers = 0;
    std::size_t hidden_parameterized = 0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].kind == LayerKind::classifier) {
            ++classifiers;
            if (i + 1 != layers.size()) {
                throw ConfigError("network.layers: classifier must be the final layer");
            }
        } else if (layers[i].parameterized()) {
            ++hidden_parameterized;
        }
    }
    if (classifiers == 0) throw ConfigError("network.layers: a classifier layer is required");
    if (classifiers > 1) throw ConfigError("network.layers: exactly one classifier layer is allowed");
    if (hidden_parameterized == 0) {
        throw ConfigError("network.layers: at least one parameterized layer before the classifier is required");
    }
}

// ---------------------------------------------------------------------------
// Shape inference
// ---------------------------------------------------------------------------

LayerShapes infer_shapes(const NetworkSpec& spec) {
    if (spec.input_shape.empty()) throw ShapeError("network input shape is empty");
    for (std::size_t e : spec.input_shape) {
        if (e == 0) throw ShapeError("network input shape has a zero extent: " + Tensor::shape_str(spec.input_shape));
    }

    LayerShapes shapes;
    std::vector<std::size_t> cur = spec.input_shape;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& layer = spec.layers[i];
        shapes.inputs.push_back(cur);
        switch (layer.kind) {
            case LayerKind::dense:
            case LayerKind::classifier:
                cur = {layer.neurons};
                break;
            case LayerKind::relu:
                break;
            case LayerKind::max_pool: {
                if (cur.size() != 3) {
                    throw ShapeError(layer_label(i, layer.kind) + ": expected a [C, H, W] input, got " +
                                     Tensor::shape_str(cur));
                }
                if (layer.window > cur[1] || layer.window > cur[2]) {
                    throw ShapeError(layer_label(i, layer.kind) + ": window " + std::to_string(layer.window) +
                                     " exceeds spatial extent of " + Tensor::shape_str(cur));
                }
                cur = {cur[0], (cur[1] - layer.window) / layer.stride + 1, (cur[2] - layer.window) / layer.stride + 1};
                break;
            }
            case LayerKind::conv1d_vertical:
            case LayerKind::conv1d_horizontal: {
                if (cur.size() != 3) {
                    throw ShapeError(layer_label(i, layer.kind) + ": expected a [C, H, W] input, got " +
                                     Tensor::shape_str(cur));
                }
                const bool vertical = layer.kind == LayerKind::conv1d_vertical;
                const std::size_t along = vertical ? cur[1] : cur[2];
                if (along + 2 * layer.padding < layer.kernel_extent) {
                    throw ShapeError(layer_label(i, layer.kind) + ": kernel extent " +
                                     std::to_string(layer.kernel_extent) + " exceeds padded input " +
                                     Tensor::shape_str(cur));
                }
                const std::size_t reduced =
                    conv1d_output_length(along, layer.kernel_extent, layer.stride, layer.padding);
                cur = vertical ? std::vector<std::size_t>{layer.neurons, reduced, cur[2]}
                               : std::vector<std::size_t>{layer.neurons, cur[1], reduced};
                break;
            }
        }
        shapes.outputs.push_back(cur);
    }
    return shapes;
}

std::size_t group_size(const LayerSpec& layer, const std::vector<std::size_t>& input_shape) {
    switch (layer.kind) {
        case LayerKind::dense:
        case LayerKind::classifier:
            return flat_size(input_shape) + 1;
        case LayerKind::conv1d_vertical:
        case LayerKind::conv1d_horizontal:
            if (input_shape.size() != 3) {
                throw ShapeError(std::string(to_string(layer.kind)) + ": expected a [C, H, W] input, got " +
                                 Tensor::shape_str(input_shape));
            }
            return input_shape[0] * layer.kernel_extent + 1;
        case LayerKind::max_pool:
        case LayerKind::relu:
            return 0;
    }
    return 0;
}

std::vector<std::size_t> parameterized_layers(const NetworkSpec& spec) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        if (spec.layers[i].parameterized()) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> regularized_layers(const NetworkSpec& spec) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        if (spec.layers[i].parameterized() && spec.layers[i].kind != LayerKind::classifier) out.push_back(i);
    }
    return out;
}

// ---------------------------------------------------------------------------
// NeuronGroup
// ---------------------------------------------------------------------------

bool NeuronGroup::is_zero() const {
    if (bias != 0.0) return false;
    for (double v : weights.values()) {
        if (v != 0.0) return false;
    }
    return true;
}

std::vector<double> NeuronGroup::flatten() const {
    std::vector<double> flat(weights.values());
    flat.push_back(bias);
    return flat;
}

void NeuronGroup::unflatten(const std::vector<double>& flat) {
    if (flat.size() != weights.numel() + 1) {
        throw ShapeError("neuron group of size " + std::to_string(weights.numel() + 1) +
                         " cannot absorb a vector of size " + std::to_string(flat.size()));
    }
    std::copy(flat.begin(), flat.end() - 1, weights.values().begin());
    bias = flat.back();
}

// ---------------------------------------------------------------------------
// Network construction
// ---------------------------------------------------------------------------

Network Network::build(NetworkSpec spec) {
    Network net;
    net.shapes_ = infer_shapes(spec);
    net.spec_ = std::move(spec);
    net.params_.resize(net.spec_.layers.size());
    for (std::size_t l = 0; l < net.spec_.layers.size(); ++l) {
        const LayerSpec& layer = net.spec_.layers[l];
        if (!layer.parameterized()) continue;
        const auto& in = net.shapes_.inputs[l];
        std::vector<std::size_t> wshape;
        if (layer.kind == LayerKind::dense || layer.kind == LayerKind::classifier) {
            wshape = {flat_size(in)};
        } else {
            wshape = {in[0], layer.kernel_extent};
        }
        net.params_[l].reserve(layer.neurons);
        for (std::size_t n = 0; n < layer.neurons; ++n) {
            NeuronGroup g;
            g.weights = Tensor(wshape);
            net.params_[l].push_back(std::move(g));
        }
    }
    return net;
}

Network Network::zeros(NetworkSpec spec) { return build(std::move(spec)); }

Network Network::random_init(NetworkSpec spec, std::uint64_t seed) {
    Network net = build(std::move(spec));
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < net.spec_.layers.size(); ++l) {
        if (net.params_[l].empty()) continue;
        const std::size_t p = group_size(net.spec_.layers[l], net.shapes_.inputs[l]);
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(p)));
        for (NeuronGroup& g : net.params_[l]) {
            for (double& w : g.weights.values()) w = dist(rng);
            g.bias = 0.0;
        }
    }
    return net;
}

std::size_t Network::classifier_layer() const {
    for (std::size_t l = spec_.layers.size(); l-- > 0;) {
        if (spec_.layers[l].kind == LayerKind::classifier) return l;
    }
    throw ConfigError("network has no classifier layer");
}

std::vector<LayerParams> Network::zero_like_params() const {
    std::vector<LayerParams> out(params_.size());
    for (std::size_t l = 0; l < params_.size(); ++l) {
        out[l].reserve(params_[l].size());
        for (const NeuronGroup& g : params_[l]) {
            NeuronGroup z;
            z.weights = Tensor(g.weights.shape());
            out[l].push_back(std::move(z));
        }
    }
    return out;
}

std::vector<double> Network::flat_params() const {
    std::vector<double> flat;
    flat.reserve(param_count());
    for (const LayerParams& layer : params_) {
        for (const NeuronGroup& g : layer) {
            flat.insert(flat.end(), g.weights.values().begin(), g.weights.values().end());
            flat.push_back(g.bias);
        }
    }
    return flat;
}

void Network::set_flat_params(const std::vector<double>& flat) {
    if (flat.size() != param_count()) {
        throw ShapeError("network holds " + std::to_string(param_count()) + " parameters, got " +
                         std::to_string(flat.size()));
    }
    std::size_t i = 0;
    for (LayerParams& layer : params_) {
        for (NeuronGroup& g : layer) {
            for (double& w : g.weights.values()) w = flat[i++];
            g.bias = flat[i++];
        }
    }
}

std::size_t Network::param_count() const {
    std::size_t total = 0;
    for (const LayerParams& layer : params_) {
        for (const NeuronGroup& g : layer) total += g.group_size();
    }
    return total;
}

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

namespace {

Tensor apply_dense(const LayerParams& groups, const Tensor& in) {
    Tensor out({groups.size()});
    const double* x = in.data();
    const std::size_t n = in.numel();
    for (std::size_t j = 0; j < groups.size(); ++j) {
        const NeuronGroup& g = groups[j];
        const double* w = g.weights.data();
        double acc = g.bias;
        for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i];
        out[j] = acc;
    }
    return out;
}

Tensor apply_conv(const LayerParams& groups, const Tensor& in, const LayerSpec& layer, bool vertical) {
    const std::size_t c_in = in.shape()[0];
    const std::size_t h = in.shape()[1];
    const std::size_t w = in.shape()[2];
    const std::size_t d = layer.kernel_extent;
    const std::size_t s = layer.stride;
    const std::size_t p = layer.padding;
    const std::size_t along = vertical ? h : w;
    const std::size_t across = vertical ? w : h;
    const std::size_t reduced = conv1d_output_length(along, d, s, p);

    Tensor out(vertical ? std::vector<std::size_t>{groups.size(), reduced, w}
                        : std::vector<std::size_t>{groups.size(), h, reduced});
    for (std::size_t n = 0; n < groups.size(); ++n) {
        const Tensor& wt = groups[n].weights;  // [c_in, d]
        for (std::size_t o = 0; o < reduced; ++o) {
            const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(o * s) - static_cast<std::ptrdiff_t>(p);
            for (std::size_t t = 0; t < across; ++t) {
                double acc = groups[n].bias;
                for (std::size_t c = 0; c < c_in; ++c) {
                    for (std::size_t k = 0; k < d; ++k) {
                        const std::ptrdiff_t pos = base + static_cast<std::ptrdiff_t>(k);
                        if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(along)) continue;
                        const std::size_t u = static_cast<std::size_t>(pos);
                        const double x = vertical ? in(c, u, t) : in(c, t, u);
                        acc += wt(c, k) * x;
                    }
                }
                if (vertical) {
                    out(n, o, t) = acc;
                } else {
                    out(n, t, o) = acc;
                }
            }
        }
    }
    return out;
}

Tensor apply_layer(const Network& net, std::size_t l, const Tensor& in) {
    const LayerSpec& layer = net.spec().layers[l];
    switch (layer.kind) {
        case LayerKind::dense:
        case LayerKind::classifier:
            return apply_dense(net.params()[l], in);
        case LayerKind::relu:
            return relu(in);
        case LayerKind::max_pool:
            return max_pool2d(in, layer.window, layer.stride);
        case LayerKind::conv1d_vertical:
            return apply_conv(net.params()[l], in, layer, true);
        case LayerKind::conv1d_horizontal:
            return apply_conv(net.params()[l], in, layer, false);
    }
    throw ContractError("unhandled layer kind");
}

}  // namespace

ForwardTrace forward(const Network& net, const Tensor& x) {
    if (x.shape() != net.input_shape()) {
        throw ShapeError("network expects input " + Tensor::shape_str(net.input_shape()) + ", got " + x.shape_str());
    }
    ForwardTrace trace;
    trace.layer_inputs.reserve(net.spec().layers.size());
    Tensor cur = x;
    for (std::size_t l = 0; l < net.spec().layers.size(); ++l) {
        trace.layer_inputs.push_back(cur);
        cur = apply_layer(net, l, cur);
    }
    trace.output = std::move(cur);
    return trace;
}

Tensor predict(const Network& net, const Tensor& x) { return forward(net, x).output; }

// ---------------------------------------------------------------------------
// Backward
// ---------------------------------------------------------------------------

namespace {

// Gradient of a dense layer: fills `grads` for this layer and returns the
// gradient with respect to the layer input.
Tensor dense_backward(const LayerParams& groups, const Tensor& in, const Tensor& gout, LayerParams& grads) {
    Tensor gin(in.shape());
    const double* x = in.data();
    const std::size_t n = in.numel();
    for (std::size_t j = 0; j < groups.size(); ++j) {
        const double gj = gout[j];
        const double* w = groups[j].weights.data();
        double* dw = grads[j].weights.data();
        double* dx = gin.data();
        for (std::size_t i = 0; i < n; ++i) {
            dw[i] += gj * x[i];
            dx[i] += gj * w[i];
        }
        grads[j].bias += gj;
    }
    return gin;
}

Tensor conv_backward(const LayerParams& groups, const Tensor& in, const Tensor& gout, const LayerSpec& layer,
                     bool vertical, LayerParams& grads) {
    const std::size_t c_in = in.shape()[0];
    const std::size_t along = vertical ? in.shape()[1] : in.shape()[2];
    const std::size_t across = vertical ? in.shape()[2] : in.shape()[1];
    const std::size_t d = layer.kernel_extent;
    const std::size_t s = layer.stride;
    const std::size_t p = layer.padding;
    const std::size_t reduced = vertical ? gout.shape()[1] : gout.shape()[2];

    Tensor gin(in.shape());
    for (std::size_t n = 0; n < groups.size(); ++n) {
        const Tensor& wt = groups[n].weights;
        Tensor& dw = grads[n].weights;
        for (std::size_t o = 0; o < reduced; ++o) {
            const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(o * s) - static_cast<std::ptrdiff_t>(p);
            for (std::size_t t = 0; t < across; ++t) {
                const double g = vertical ? gout(n, o, t) : gout(n, t, o);
                grads[n].bias += g;
                for (std::size_t c = 0; c < c_in; ++c) {
                    for (std::size_t k = 0; k < d; ++k) {
                        const std::ptrdiff_t pos = base + static_cast<std::ptrdiff_t>(k);
                        if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(along)) continue;
                        const std::size_t u = static_cast<std::size_t>(pos);
                        if (vertical) {
                            dw(c, k) += g * in(c, u, t);
                            gin(c, u, t) += g * wt(c, k);
                        } else {
                            dw(c, k) += g * in(c, t, u);
                            gin(c, t, u) += g * wt(c, k);
                        }
                    }
                }
            }
        }
    }
    return gin;
}

Tensor pool_backward(const Tensor& in, const Tensor& gout, const LayerSpec& layer) {
    const std::size_t c_n = in.shape()[0];
    const std::size_t oh = gout.shape()[1];
    const std::size_t ow = gout.shape()[2];
    Tensor gin(in.shape());
    for (std::size_t c = 0; c < c_n; ++c) {
        for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t x = 0; x < ow; ++x) {
                // First maximum in scan order, matching the forward pass.
                std::size_t best_y = y * layer.stride;
                std::size_t best_x = x * layer.stride;
                double best = in(c, best_y, best_x);
                for (std::size_t dy = 0; dy < layer.window; ++dy) {
                    for (std::size_t dx = 0; dx < layer.window; ++dx) {
                        const double v = in(c, y * layer.stride + dy, x * layer.stride + dx);
                        if (v > best) {
                            best = v;
                            best_y = y * layer.stride + dy;
                            best_x = x * layer.stride + dx;
                        }
                    }
                }
                gin(c, best_y, best_x) += gout(c, y, x);
            }
        }
    }
    return gin;
}

}  // namespace

std::vector<LayerParams> backward(const Network& net, const ForwardTrace& trace, const Tensor& loss_grad) {
    const std::size_t n_layers = net.spec().layers.size();
    if (trace.layer_inputs.size() != n_layers) {
        throw ContractError("forward trace records " + std::to_string(trace.layer_inputs.size()) +
                            " layers, network has " + std::to_string(n_layers));
    }
    for (std::size_t l = 0; l < n_layers; ++l) {
        if (trace.layer_inputs[l].shape() != net.shapes().inputs[l]) {
            throw ContractError("forward trace does not match this network: layer " + std::to_string(l) +
                                " input is " + trace.layer_inputs[l].shape_str() + ", expected " +
                                Tensor::shape_str(net.shapes().inputs[l]));
        }
    }
    if (trace.output.shape() != net.output_shape()) {
        throw ContractError("forward trace output is " + trace.output.shape_str() + ", expected " +
                            Tensor::shape_str(net.output_shape()));
    }
    if (!loss_grad.same_shape(trace.output)) {
        throw ShapeError("loss gradient shape " + loss_grad.shape_str() + " does not match logits " +
                         trace.output.shape_str());
    }

    std::vector<LayerParams> grads = net.zero_like_params();
    Tensor g = loss_grad;
    for (std::size_t l = n_layers; l-- > 0;) {
        const LayerSpec& layer = net.spec().layers[l];
        const Tensor& in = trace.layer_inputs[l];
        switch (layer.kind) {
            case LayerKind::dense:
            case LayerKind::classifier:
                g = dense_backward(net.params()[l], in, g, grads[l]);
                break;
            case LayerKind::relu: {
                Tensor gin(in.shape());
                for (std::size_t i = 0; i < in.numel(); ++i) gin[i] = in[i] > 0.0 ? g[i] : 0.0;
                g = std::move(gin);
                break;
            }
            case LayerKind::max_pool:
                g = pool_backward(in, g, layer);
                break;
            case LayerKind::conv1d_vertical:
                g = conv_backward(net.params()[l], in, g, layer, true, grads[l]);
                break;
            case LayerKind::conv1d_horizontal:
                g = conv_backward(net.params()[l], in, g, layer, false, grads[l]);
                break;
        }
    }
    return grads;
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

namespace {

void check_label(const Tensor& logits, std::size_t label) {
    if (logits.empty()) throw ShapeError("loss over empty logits");
    if (label >= logits.numel()) {
        throw ShapeError("label " + std::to_string(label) + " out of range for " + std::to_string(logits.numel()) +
                         " classes");
    }
}

double log_sum_exp(const Tensor& logits) {
    double m = logits[0];
    for (std::size_t i = 1; i < logits.numel(); ++i) m = std::max(m, logits[i]);
    double acc = 0.0;
    for (std::size_t i = 0; i < logits.numel(); ++i) acc += std::exp(logits[i] - m);
    return m + std::log(acc);
}

}  // namespace

double loss_value(LossKind loss, const Tensor& logits, std::size_t label) {
    check_label(logits, label);
    if (loss == LossKind::cross_entropy) {
        return log_sum_exp(logits) - logits[label];
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < logits.numel(); ++i) {
        const double target = i == label ? 1.0 : 0.0;
        const double diff = logits[i] - target;
        acc += diff * diff;
    }
    return acc;
}

Tensor loss_gradient(LossKind loss, const Tensor& logits, std::size_t label) {
    check_label(logits, label);
    Tensor g(logits.shape());
    if (loss == LossKind::cross_entropy) {
        const double lse = log_sum_exp(logits);
        for (std::size_t i = 0; i < logits.numel(); ++i) g[i] = std::exp(logits[i] - lse);
        g[label] -= 1.0;
    } else {
        for (std::size_t i = 0; i < logits.numel(); ++i) {
            const double target = i == label ? 1.0 : 0.0;
            g[i] = 2.0 * (logits[i] - target);
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Decomposed two-stage convolution
// ---------------------------------------------------------------------------

Tensor decomposed_forward(const std::vector<NeuronGroup>& vertical_groups,
                          const std::vector<NeuronGroup>& horizontal_groups, const Tensor& input, std::size_t stride,
                          std::size_t padding) {
    if (input.rank() != 3) {
        throw ShapeError("decomposed stage expects a [C, H, W] input, got " + input.shape_str());
    }
    if (vertical_groups.empty() || horizontal_groups.empty()) {
        throw ShapeError("decomposed stage needs at least one filter per stage");
    }
    const std::size_t d_v = vertical_groups.front().weights.shape()[1];
    const std::size_t d_h = horizontal_groups.front().weights.shape()[1];
    for (const NeuronGroup& g : vertical_groups) {
        if (g.weights.rank() != 2 || g.weights.shape()[0] != input.shape()[0]) {
            throw ShapeError("vertical filter " + g.weights.shape_str() + " does not match input channels " +
                             std::to_string(input.shape()[0]));
        }
    }
    for (const NeuronGroup& g : horizontal_groups) {
        if (g.weights.rank() != 2 || g.weights.shape()[0] != vertical_groups.size()) {
            throw ShapeError("horizontal filter " + g.weights.shape_str() + " does not match " +
                             std::to_string(vertical_groups.size()) + " vertical outputs");
        }
    }

    LayerSpec vspec = LayerSpec::conv_vertical(vertical_groups.size(), d_v, stride, padding);
    LayerSpec hspec = LayerSpec::conv_horizontal(horizontal_groups.size(), d_h, stride, padding);
    if (input.shape()[1] + 2 * padding < d_v) {
        throw ShapeError("vertical kernel extent " + std::to_string(d_v) + " exceeds padded input " +
                         input.shape_str());
    }
    Tensor mid = relu(apply_conv(vertical_groups, input, vspec, true));
    if (mid.shape()[2] + 2 * padding < d_h) {
        throw ShapeError("horizontal kernel extent " + std::to_string(d_h) + " exceeds intermediate " +
                         mid.shape_str());
    }
    return relu(apply_conv(horizontal_groups, mid, hspec, false));
}

ParamCounts count_params(const Network& net) {
    ParamCounts counts;
    counts.per_layer.resize(net.params().size(), 0);
    for (std::size_t l = 0; l < net.params().size(); ++l) {
        for (const NeuronGroup& g : net.params()[l]) counts.per_layer[l] += g.group_size();
        counts.total += counts.per_layer[l];
    }
    return counts;
}

std::size_t argmax_index(const Tensor& logits) {
    if (logits.empty()) throw ShapeError("argmax over empty logits");
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.numel(); ++i) {
        if (logits[i] > logits[best]) best = i;
    }
    return best;
}

}  // namespace slimnet
