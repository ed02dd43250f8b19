#include "slimnet/pruner.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "slimnet/detail/json_util.hpp"
#include "slimnet/errors.hpp"

namespace slimnet {

namespace {

std::size_t flat_size(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

bool group_dead(const NeuronGroup& g, double eps) {
    if (std::abs(g.bias) > eps) return false;
    for (double v : g.weights.values()) {
        if (std::abs(v) > eps) return false;
    }
    return true;
}

}  // namespace

DeadNeurons detect_dead(const Network& net, double eps) {
    if (eps < 0.0) throw std::domain_error("dead-neuron tolerance must be non-negative");
    DeadNeurons dead;
    dead.per_layer.resize(net.spec().layers.size());
    for (std::size_t l : regularized_layers(net.spec())) {
        const LayerParams& groups = net.params()[l];
        for (std::size_t n = 0; n < groups.size(); ++n) {
            if (group_dead(groups[n], eps)) {
                dead.per_layer[l].push_back(n);
                ++dead.total;
            }
        }
    }
    return dead;
}

CompactionResult compact(const Network& net, double eps) {
    const NetworkSpec& spec = net.spec();
    const LayerShapes& shapes = net.shapes();
    const DeadNeurons dead = detect_dead(net, eps);

    CompactionResult result;
    result.kept.resize(spec.layers.size());
    NetworkSpec new_spec = spec;
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        if (!spec.layers[l].parameterized()) continue;
        const std::size_t n = spec.layers[l].neurons;
        std::vector<char> is_dead(n, 0);
        for (std::size_t idx : dead.per_layer[l]) is_dead[idx] = 1;
        for (std::size_t idx = 0; idx < n; ++idx) {
            if (!is_dead[idx]) result.kept[l].push_back(idx);
        }
        if (result.kept[l].empty()) {
            throw StructuralError("layer " + std::to_string(l) + " (" + to_string(spec.layers[l].kind) +
                                  "): every neuron is zero; removing them would sever the network");
        }
        new_spec.layers[l].neurons = result.kept[l].size();
    }

    Network out = Network::zeros(std::move(new_spec));

    // Surviving "channels" of the tensor flowing between layers, as original
    // indices: dimension-0 channels for rank-3 tensors, elements for rank-1.
    std::vector<std::size_t> chan(shapes.inputs.empty() ? 0 : spec.input_shape[0]);
    std::iota(chan.begin(), chan.end(), std::size_t{0});

    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        const LayerSpec& layer = spec.layers[l];
        switch (layer.kind) {
            case LayerKind::relu:
            case LayerKind::max_pool:
                break;  // channel identity preserved
            case LayerKind::dense:
            case LayerKind::classifier: {
                const std::vector<std::size_t>& in_shape = shapes.inputs[l];
                std::vector<std::size_t> slots;
                if (in_shape.size() == 3) {
                    const std::size_t block = in_shape[1] * in_shape[2];
                    slots.reserve(chan.size() * block);
                    for (std::size_t c : chan) {
                        for (std::size_t k = 0; k < block; ++k) slots.push_back(c * block + k);
                    }
                } else {
                    slots = chan;
                }
                for (std::size_t j = 0; j < result.kept[l].size(); ++j) {
                    const NeuronGroup& src = net.params()[l][result.kept[l][j]];
                    NeuronGroup& dst = out.params()[l][j];
                    for (std::size_t i = 0; i < slots.size(); ++i) dst.weights[i] = src.weights[slots[i]];
                    dst.bias = src.bias;
                }
                chan = result.kept[l];
                break;
            }
            case LayerKind::conv1d_vertical:
            case LayerKind::conv1d_horizontal: {
                for (std::size_t j = 0; j < result.kept[l].size(); ++j) {
                    const NeuronGroup& src = net.params()[l][result.kept[l][j]];
                    NeuronGroup& dst = out.params()[l][j];
                    for (std::size_t c = 0; c < chan.size(); ++c) {
                        for (std::size_t k = 0; k < layer.kernel_extent; ++k) dst.weights(c, k) = src.weights(chan[c], k);
                    }
                    dst.bias = src.bias;
                }
                chan = result.kept[l];
                break;
            }
        }
    }

    result.net = std::move(out);
    return result;
}

std::size_t flop_count(const Network& net) {
    std::size_t flops = 0;
    for (std::size_t l : parameterized_layers(net.spec())) {
        const std::size_t p = group_size(net.spec().layers[l], net.shapes().inputs[l]);
        flops += 2 * flat_size(net.shapes().outputs[l]) * (p - 1);
    }
    return flops;
}

std::size_t feature_memory(const Network& net) {
    std::size_t values = 0;
    for (std::size_t l = 0; l < net.spec().layers.size(); ++l) {
        const LayerKind kind = net.spec().layers[l].kind;
        if (kind == LayerKind::relu || kind == LayerKind::max_pool || kind == LayerKind::classifier) {
            values += flat_size(net.shapes().outputs[l]);
        }
    }
    return values;
}

SparsityReport make_report(const Network& before, const Network& after, double accuracy_regularized,
                           double accuracy_baseline) {
    const CompactionResult comp = compact(before);
    const NetworkSpec& bspec = before.spec();
    const NetworkSpec& aspec = after.spec();
    if (aspec.layers.size() != bspec.layers.size() || aspec.input_shape != bspec.input_shape) {
        throw ContractError("after network is not the compaction of before: different architecture");
    }
    for (std::size_t l = 0; l < bspec.layers.size(); ++l) {
        if (aspec.layers[l].kind != bspec.layers[l].kind) {
            throw ContractError("after network is not the compaction of before: layer " + std::to_string(l) + " is " +
                                to_string(aspec.layers[l].kind) + ", expected " + to_string(bspec.layers[l].kind));
        }
        if (bspec.layers[l].parameterized() && aspec.layers[l].neurons != comp.kept[l].size()) {
            throw ContractError("after network is not the compaction of before: layer " + std::to_string(l) + " has " +
                                std::to_string(aspec.layers[l].neurons) + " neurons, expected " +
                                std::to_string(comp.kept[l].size()));
        }
    }

    const DeadNeurons dead = detect_dead(before);
    const std::vector<std::size_t> reg = regularized_layers(bspec);
    std::size_t reg_neurons = 0;
    std::size_t reg_params = 0;
    std::size_t dead_group_params = 0;
    std::size_t reg_zero_entries = 0;
    for (std::size_t l : reg) {
        const std::size_t p = group_size(bspec.layers[l], before.shapes().inputs[l]);
        reg_neurons += before.params()[l].size();
        reg_params += before.params()[l].size() * p;
        dead_group_params += dead.per_layer[l].size() * p;
        for (const NeuronGroup& g : before.params()[l]) {
            for (double v : g.weights.values()) {
                if (v == 0.0) ++reg_zero_entries;
            }
            if (g.bias == 0.0) ++reg_zero_entries;
        }
    }

    const std::size_t total_before = before.param_count();
    const std::size_t total_after = after.param_count();
    const std::size_t removed = total_before - total_after;
    const std::size_t stray_zeros = reg_zero_entries - dead_group_params;

    SparsityReport report;
    if (reg_neurons > 0) report.neurons_pct = 100.0 * static_cast<double>(dead.total) / static_cast<double>(reg_neurons);
    if (reg_params > 0) {
        report.group_param_pct = 100.0 * static_cast<double>(dead_group_params) / static_cast<double>(reg_params);
        report.total_param_pct = 100.0 * static_cast<double>(reg_zero_entries) / static_cast<double>(reg_params);
    }
    if (total_before > 0) {
        report.total_induced_pct =
            100.0 * static_cast<double>(removed + stray_zeros) / static_cast<double>(total_before);
    }
    for (std::size_t l : reg) report.per_layer_neuron_counts.emplace_back(before.params()[l].size(), comp.kept[l].size());
    report.accuracy_gap = 100.0 * (accuracy_regularized - accuracy_baseline);
    report.flops_before = flop_count(before);
    report.flops_after = flop_count(after);
    report.feature_memory_before = feature_memory(before);
    report.feature_memory_after = feature_memory(after);
    report.param_memory_before = total_before;
    report.param_memory_after = total_after;
    return report;
}

std::string report_json(const SparsityReport& report) {
    detail::ordered_json j;
    j["neurons_pct"] = report.neurons_pct;
    j["group_param_pct"] = report.group_param_pct;
    j["total_param_pct"] = report.total_param_pct;
    j["total_induced_pct"] = report.total_induced_pct;
    j["per_layer_neuron_counts"] = detail::ordered_json::array();
    for (const auto& [kept_before, kept_after] : report.per_layer_neuron_counts) {
        j["per_layer_neuron_counts"].push_back({kept_before, kept_after});
    }
    j["accuracy_gap"] = report.accuracy_gap;
    j["flops_before"] = report.flops_before;
    j["flops_after"] = report.flops_after;
    j["feature_memory_before"] = report.feature_memory_before;
    j["feature_memory_after"] = report.feature_memory_after;
    j["param_memory_before"] = report.param_memory_before;
    j["param_memory_after"] = report.param_memory_after;
    return j.dump(2) + "\n";
}

std::string report_text(const SparsityReport& report) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    const auto pct_row = [&os](const char* label, double value, const char* unit) {
        os << "  " << std::left << std::setw(15) << label << std::right << std::setw(8) << value << unit << "\n";
    };
    os << "pruning report\n";
    pct_row("neurons", report.neurons_pct, "%");
    pct_row("group param", report.group_param_pct, "%");
    pct_row("total param", report.total_param_pct, "%");
    pct_row("total induced", report.total_induced_pct, "%");
    pct_row("accuracy gap", report.accuracy_gap, "pp");
    const auto count_row = [&os](const char* label, std::size_t a, std::size_t b) {
        os << "  " << std::left << std::setw(15) << label << std::right << std::setw(8) << a << " -> " << b << "\n";
    };
    count_row("flops", report.flops_before, report.flops_after);
    count_row("feature memory", report.feature_memory_before, report.feature_memory_after);
    count_row("param memory", report.param_memory_before, report.param_memory_after);
    os << "  " << std::left << std::setw(15) << "neurons/layer" << std::right;
    for (const auto& [kept_before, kept_after] : report.per_layer_neuron_counts) {
        os << "  " << kept_before << " -> " << kept_after;
    }
    os << "\n";
    return os.str();
}

}  // namespace slimnet
