#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "slimnet/network.hpp"

namespace slimnet {

/// Exactly-zero neuron groups per layer. Only penalized layers (the ones the
/// group regularizer can kill) are scanned; other layers report none.
struct DeadNeurons {
    std::vector<std::vector<std::size_t>> per_layer;
    std::size_t total = 0;
};

/// A group counts as dead when every entry, bias included, has magnitude at
/// most eps. The default detects the exact zeros the proximal step writes.
DeadNeurons detect_dead(const Network& net, double eps = 0.0);

struct CompactionResult {
    Network net;
    /// Original indices of the surviving neurons, indexed by layer; empty
    /// for layers without parameters.
    std::vector<std::vector<std::size_t>> kept;
};

/// Remove dead neuron groups and every downstream weight slot that read
/// them, producing a smaller network with identical outputs. Throws
/// StructuralError naming the layer if removal would leave a layer with no
/// neurons. Applying compact() twice is a no-op the second time.
CompactionResult compact(const Network& net, double eps = 0.0);

/// Structure and cost accounting for a pruning run. Percentages compare the
/// uncompacted network against its compacted form; the accuracy gap is the
/// regularized model's accuracy minus the unregularized baseline's, in
/// percentage points.
struct SparsityReport {
    double neurons_pct = 0.0;        // dead neurons / penalized neurons
    double group_param_pct = 0.0;    // params in dead groups / penalized-layer params
    double total_param_pct = 0.0;    // all exact zeros in penalized layers / penalized-layer params
    double total_induced_pct = 0.0;  // dead-group + induced + stray zeros / all params
    std::vector<std::pair<std::size_t, std::size_t>> per_layer_neuron_counts;  // penalized layers, before -> after
    double accuracy_gap = 0.0;
    std::size_t flops_before = 0;
    std::size_t flops_after = 0;
    std::size_t feature_memory_before = 0;  // activation values held at batch 1
    std::size_t feature_memory_after = 0;
    std::size_t param_memory_before = 0;  // parameter values held
    std::size_t param_memory_after = 0;
};

/// Build the report for a trained network and its compacted counterpart.
/// `after` must be the compaction of `before` (same survivors per layer);
/// anything else raises ContractError. Accuracies are fractions in [0, 1]:
/// the regularized model's and the unregularized same-seed baseline's.
SparsityReport make_report(const Network& before, const Network& after, double accuracy_regularized,
                           double accuracy_baseline);

std::string report_json(const SparsityReport& report);
std::string report_text(const SparsityReport& report);

/// Multiply-accumulate work per forward pass, counted as 2 * MACs, batch 1.
std::size_t flop_count(const Network& net);

/// Activation values materialized by relu / pooling / classifier layers.
std::size_t feature_memory(const Network& net);

}  // namespace slimnet
