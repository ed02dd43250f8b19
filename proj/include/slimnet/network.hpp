#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slimnet/tensor.hpp"

namespace slimnet {

enum class LayerKind {
    dense,
    conv1d_vertical,
    conv1d_horizontal,
    max_pool,
    relu,
    classifier,
};

enum class LossKind { cross_entropy, squared_error };

const char* to_string(LayerKind kind);
const char* to_string(LossKind loss);

/// One layer of a network architecture. Parameterized kinds (dense, conv,
/// classifier) carry neurons; conv kinds additionally carry kernel geometry.
/// The JSON form also accepts a "decomposed_pair" kind, which expands to
/// conv1d_vertical + relu + conv1d_horizontal + relu on parse.
struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    std::size_t neurons = 0;
    std::size_t kernel_extent = 0;
    std::size_t stride = 1;
    std::size_t padding = 0;
    std::size_t window = 0;  // max_pool only

    bool parameterized() const {
        return kind == LayerKind::dense || kind == LayerKind::conv1d_vertical ||
               kind == LayerKind::conv1d_horizontal || kind == LayerKind::classifier;
    }

    static LayerSpec dense_layer(std::size_t neurons);
    static LayerSpec conv_vertical(std::size_t neurons, std::size_t d, std::size_t stride = 1, std::size_t padding = 0);
    static LayerSpec conv_horizontal(std::size_t neurons, std::size_t d, std::size_t stride = 1, std::size_t padding = 0);
    static LayerSpec pool(std::size_t window, std::size_t stride);
    static LayerSpec activation();
    static LayerSpec classifier_layer(std::size_t classes);
};

/// Architecture description: an ordered layer list over a fixed input shape.
struct NetworkSpec {
    std::vector<std::size_t> input_shape;  // [n] or [C, H, W]
    std::vector<LayerSpec> layers;
    LossKind loss = LossKind::cross_entropy;

    /// Parse from JSON, expanding decomposed_pair sugar. Throws ConfigError
    /// naming the offending field.
    static NetworkSpec from_json(const std::string& text);
    std::string to_json() const;

    /// Structural checks beyond shape inference: classifier present, last and
    /// unique, and at least one parameterized layer before it.
    void validate_for_training() const;
};

/// Per-layer input/output shapes derived from a spec. Throws ShapeError when
/// adjacent layers are incompatible.
struct LayerShapes {
    std::vector<std::vector<std::size_t>> inputs;
    std::vector<std::vector<std::size_t>> outputs;
};

LayerShapes infer_shapes(const NetworkSpec& spec);

/// Group size P_l for a parameterized layer: weights plus bias.
std::size_t group_size(const LayerSpec& layer, const std::vector<std::size_t>& input_shape);

/// Indices of parameterized layers (classifier included) / of layers subject
/// to the group penalty (classifier excluded).
std::vector<std::size_t> parameterized_layers(const NetworkSpec& spec);
std::vector<std::size_t> regularized_layers(const NetworkSpec& spec);

/// The complete parameter block of one neuron: its linear operator and bias.
/// This is the atomic unit the structured regularizer can zero out.
struct NeuronGroup {
    Tensor weights;  // dense/classifier: [in]; conv: [C, d]
    double bias = 0.0;

    std::size_t group_size() const { return weights.numel() + 1; }

    /// True iff every entry, bias included, is exactly 0.0.
    bool is_zero() const;

    /// [weights..., bias] as a flat vector, and back.
    std::vector<double> flatten() const;
    void unflatten(const std::vector<double>& flat);
};

using LayerParams = std::vector<NeuronGroup>;

/// An instantiated network: spec plus per-layer neuron groups. params()[l] is
/// empty for non-parameterized layers and holds exactly neurons groups of
/// size P_l otherwise.
class Network {
public:
    Network() = default;

    /// All parameters zero.
    static Network zeros(NetworkSpec spec);

    /// Seeded Gaussian weights with std sqrt(2 / P_l), zero biases.
    static Network random_init(NetworkSpec spec, std::uint64_t seed);

    const NetworkSpec& spec() const { return spec_; }
    const LayerShapes& shapes() const { return shapes_; }
    std::vector<LayerParams>& params() { return params_; }
    const std::vector<LayerParams>& params() const { return params_; }

    const std::vector<std::size_t>& input_shape() const { return spec_.input_shape; }
    const std::vector<std::size_t>& output_shape() const { return shapes_.outputs.back(); }
    std::size_t classifier_layer() const;

    /// Mirror of params() with all values zero, for accumulating gradients.
    std::vector<LayerParams> zero_like_params() const;

    /// Flat parameter vector in declaration order (layer, neuron, weights,
    /// bias) as used by the checkpoint format.
    std::vector<double> flat_params() const;
    void set_flat_params(const std::vector<double>& flat);
    std::size_t param_count() const;

private:
    static Network build(NetworkSpec spec);

    NetworkSpec spec_;
    LayerShapes shapes_;
    std::vector<LayerParams> params_;
};

/// Per-layer inputs recorded by a forward pass, consumed by backward().
struct ForwardTrace {
    std::vector<Tensor> layer_inputs;  // input to each layer, size L
    Tensor output;                     // classifier logits
};

/// Run the network on one input. Throws ShapeError when x does not match the
/// spec's input shape.
ForwardTrace forward(const Network& net, const Tensor& x);
Tensor predict(const Network& net, const Tensor& x);

/// Gradient of `loss_grad` (dL/dlogits) with respect to every parameter,
/// bias included. The trace must come from a forward() call on this network;
/// a mismatched trace raises ContractError.
std::vector<LayerParams> backward(const Network& net, const ForwardTrace& trace, const Tensor& loss_grad);

double loss_value(LossKind loss, const Tensor& logits, std::size_t label);
Tensor loss_gradient(LossKind loss, const Tensor& logits, std::size_t label);

/// Two-stage 1-D composition: relu(conv_h(relu(conv_v(input)))), the
/// decomposed form of a 2-D convolutional layer over shared vertical filters.
Tensor decomposed_forward(const std::vector<NeuronGroup>& vertical_groups,
                          const std::vector<NeuronGroup>& horizontal_groups, const Tensor& input,
                          std::size_t stride = 1, std::size_t padding = 0);

struct ParamCounts {
    std::vector<std::size_t> per_layer;  // size L, zero for non-parameterized
    std::size_t total = 0;
};

ParamCounts count_params(const Network& net);

std::size_t argmax_index(const Tensor& logits);

}  // namespace slimnet
