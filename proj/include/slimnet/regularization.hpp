#pragma once

#include <cstddef>
#include <vector>

#include "slimnet/network.hpp"

namespace slimnet {

/// Sparse-group penalty configuration. `per_layer_lambda` carries one
/// strength per penalized layer — the parameterized layers except the
/// classifier, in network order. `alpha` in [0, 1] mixes the neuron-group
/// term against a plain l1 term: 0 is pure group sparsity, 1 is pure lasso.
struct RegularizerConfig {
    double alpha = 0.0;
    std::vector<double> per_layer_lambda;

    /// All-zero strengths for every penalized layer of `spec`.
    static RegularizerConfig none(const NetworkSpec& spec);

    /// Throws ConfigError on out-of-range alpha, negative or non-finite
    /// strengths, or a strength count that does not match `spec`.
    void validate(const NetworkSpec& spec) const;

    bool is_zero() const;
};

/// Penalty value over the network's penalized layers:
/// sum over layers of (1-alpha) * lambda_l * sqrt(P_l) * sum of group l2
/// norms, plus alpha * lambda_l * layer l1 norm. Groups include the bias.
/// Summation order is deterministic: layer ascending, neuron ascending,
/// entries in flat order. A branch with zero coefficient is skipped
/// entirely, so alpha == 0 computes the pure group penalty bit for bit.
double regularizer_value(const Network& net, const RegularizerConfig& cfg);

/// Elementwise shrink toward zero: sign(z) * max(|z| - tau, 0). A negative
/// tau throws std::domain_error; tau == 0 returns the input unchanged.
std::vector<double> soft_threshold(const std::vector<double>& z, double tau);
Tensor soft_threshold(const Tensor& z, double tau);

/// Closed-form proximal update of one neuron group theta against the
/// penalty with strength lambda and mix alpha, under step size `step`:
/// soft-threshold by step * alpha * lambda, then scale the surviving vector
/// by max(0, 1 - step * (1-alpha) * lambda * sqrt(P) / its l2 norm), with
/// P = theta.size(). A group at or inside the kill radius comes back
/// exactly zero. lambda == 0 returns the input unchanged, bit for bit.
std::vector<double> prox_group(const std::vector<double>& theta, double step, double lambda, double alpha);

/// Result of a whole-network proximal sweep. `zeroed[l]` lists the groups of
/// layer l that are exactly zero after the sweep, for penalized layers with
/// a positive strength; layers the sweep did not touch report none.
struct ProxOutcome {
    std::vector<std::vector<std::size_t>> zeroed;
    std::size_t zeroed_total = 0;
};

/// Apply prox_group to every penalized group in place. `step` must be
/// positive. Layers with lambda == 0 are left untouched.
ProxOutcome prox_all(Network& net, const RegularizerConfig& cfg, double step);

}  // namespace slimnet
