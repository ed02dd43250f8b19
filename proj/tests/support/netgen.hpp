#pragma once

// Deterministic catalogue of small architectures used by the gradient and
// compaction sweeps: dense stacks, 1-D convolution chains, pooling, both
// losses, and one vertical/horizontal decomposed pair. Every network stays
// at or below 500 parameters.

#include <cstddef>
#include <vector>

#include "slimnet/network.hpp"

namespace testnets {

inline slimnet::NetworkSpec dense_stack(std::size_t in, std::size_t width, std::size_t classes,
                                        slimnet::LossKind loss) {
    slimnet::NetworkSpec spec;
    spec.input_shape = {in};
    spec.layers = {slimnet::LayerSpec::dense_layer(width), slimnet::LayerSpec::activation(),
                   slimnet::LayerSpec::classifier_layer(classes)};
    spec.loss = loss;
    return spec;
}

inline slimnet::NetworkSpec dense_double(std::size_t in, std::size_t width, std::size_t classes,
                                         slimnet::LossKind loss) {
    slimnet::NetworkSpec spec;
    spec.input_shape = {in};
    spec.layers = {slimnet::LayerSpec::dense_layer(width), slimnet::LayerSpec::activation(),
                   slimnet::LayerSpec::dense_layer(width), slimnet::LayerSpec::activation(),
                   slimnet::LayerSpec::classifier_layer(classes)};
    spec.loss = loss;
    return spec;
}

inline slimnet::NetworkSpec conv_vertical_net(std::size_t filters, slimnet::LossKind loss) {
    slimnet::NetworkSpec spec;
    spec.input_shape = {2, 5, 6};
    spec.layers = {slimnet::LayerSpec::conv_vertical(filters, 3, 1, 1), slimnet::LayerSpec::activation(),
                   slimnet::LayerSpec::classifier_layer(2)};
    spec.loss = loss;
    return spec;
}

inline slimnet::NetworkSpec conv_horizontal_strided(std::size_t filters) {
    slimnet::NetworkSpec spec;
    spec.input_shape = {2, 5, 7};
    spec.layers = {slimnet::LayerSpec::conv_horizontal(filters, 3, 2, 0), slimnet::LayerSpec::activation(),
                   slimnet::LayerSpec::classifier_layer(2)};
    return spec;
}

inline slimnet::NetworkSpec conv_chain(std::size_t v_filters, std::size_t h_filters) {
    slimnet::NetworkSpec spec;
    spec.input_shape = {1, 6, 6};
    spec.layers = {slimnet::LayerSpec::conv_vertical(v_filters, 3, 1, 1), slimnet::LayerSpec::activation(),
                   slimnet::LayerSpec::conv_horizontal(h_filters, 3, 1, 1), slimnet::LayerSpec::activation(),
                   slimnet::LayerSpec::classifier_layer(3)};
    return spec;
}

inline slimnet::NetworkSpec pooled_conv() {
    slimnet::NetworkSpec spec;
    spec.input_shape = {1, 6, 6};
    spec.layers = {slimnet::LayerSpec::conv_vertical(3, 3, 1, 1), slimnet::LayerSpec::activation(),
                   slimnet::LayerSpec::pool(2, 2), slimnet::LayerSpec::classifier_layer(2)};
    return spec;
}

inline slimnet::NetworkSpec decomposed_net() {
    return slimnet::NetworkSpec::from_json(R"({
        "input_shape": [2, 6, 6],
        "layers": [
            {"kind": "decomposed_pair", "shared_filters": 3, "neurons": 2, "kernel_extent": 3, "padding": 1},
            {"kind": "classifier", "neurons": 2}
        ],
        "loss": "cross_entropy"
    })");
}

/// The sweep list for gradient and compaction checks; index 16 is the
/// decomposed vertical/horizontal pair.
inline std::vector<slimnet::NetworkSpec> sweep_specs() {
    using slimnet::LossKind;
    std::vector<slimnet::NetworkSpec> specs;
    specs.push_back(dense_stack(6, 8, 3, LossKind::cross_entropy));
    specs.push_back(dense_stack(6, 12, 3, LossKind::cross_entropy));
    specs.push_back(dense_stack(6, 16, 4, LossKind::squared_error));
    specs.push_back(dense_stack(10, 10, 5, LossKind::cross_entropy));
    specs.push_back(dense_stack(4, 20, 2, LossKind::squared_error));
    specs.push_back(dense_double(5, 8, 3, LossKind::cross_entropy));
    specs.push_back(dense_double(5, 12, 3, LossKind::cross_entropy));
    specs.push_back(dense_double(5, 16, 4, LossKind::squared_error));
    specs.push_back(dense_double(8, 10, 2, LossKind::cross_entropy));
    specs.push_back(conv_vertical_net(2, LossKind::cross_entropy));
    specs.push_back(conv_vertical_net(3, LossKind::cross_entropy));
    specs.push_back(conv_vertical_net(3, LossKind::squared_error));
    specs.push_back(conv_horizontal_strided(3));
    specs.push_back(conv_horizontal_strided(4));
    specs.push_back(conv_chain(3, 2));
    specs.push_back(conv_chain(2, 3));
    specs.push_back(decomposed_net());
    specs.push_back(pooled_conv());
    specs.push_back(dense_stack(16, 12, 6, LossKind::cross_entropy));
    specs.push_back(dense_double(6, 10, 4, LossKind::cross_entropy));
    return specs;
}

}  // namespace testnets
