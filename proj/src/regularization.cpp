#include "slimnet/regularization.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "slimnet/errors.hpp"

namespace slimnet {

RegularizerConfig RegularizerConfig::none(const NetworkSpec& spec) {
    RegularizerConfig cfg;
    cfg.alpha = 0.0;
    cfg.per_layer_lambda.assign(regularized_layers(spec).size(), 0.0);
    return cfg;
}

void RegularizerConfig::validate(const NetworkSpec& spec) const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw ConfigError("regularizer.alpha: expected a value in [0, 1], got " + std::to_string(alpha));
    }
    const std::size_t expected = regularized_layers(spec).size();
    if (per_layer_lambda.size() != expected) {
        throw ConfigError("regularizer.per_layer_lambda: network has " + std::to_string(expected) +
                          " penalized layers, got " + std::to_string(per_layer_lambda.size()) + " strengths");
    }
    for (std::size_t i = 0; i < per_layer_lambda.size(); ++i) {
        const double v = per_layer_lambda[i];
        if (!(std::isfinite(v) && v >= 0.0)) {
            throw ConfigError("regularizer.per_layer_lambda[" + std::to_string(i) +
                              "]: expected a finite non-negative value, got " + std::to_string(v));
        }
    }
}

bool RegularizerConfig::is_zero() const {
    for (double v : per_layer_lambda) {
        if (v != 0.0) return false;
    }
    return true;
}

double regularizer_value(const Network& net, const RegularizerConfig& cfg) {
    cfg.validate(net.spec());
    const std::vector<std::size_t> layers = regularized_layers(net.spec());
    double total = 0.0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::size_t l = layers[i];
        const double lambda = cfg.per_layer_lambda[i];
        if (lambda == 0.0) continue;
        const std::size_t p = group_size(net.spec().layers[l], net.shapes().inputs[l]);
        double group_term = 0.0;
        double l1_term = 0.0;
        for (const NeuronGroup& g : net.params()[l]) {
            const std::vector<double> flat = g.flatten();
            if (cfg.alpha < 1.0) group_term += l2_norm(flat.data(), flat.size());
            if (cfg.alpha > 0.0) l1_term += l1_norm(flat.data(), flat.size());
        }
        if (cfg.alpha < 1.0) {
            total += (1.0 - cfg.alpha) * lambda * std::sqrt(static_cast<double>(p)) * group_term;
        }
        if (cfg.alpha > 0.0) total += cfg.alpha * lambda * l1_term;
    }
    return total;
}

std::vector<double> soft_threshold(const std::vector<double>& z, double tau) {
    if (tau < 0.0) throw std::domain_error("soft threshold must be non-negative, got " + std::to_string(tau));
    if (tau == 0.0) return z;
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double mag = std::abs(z[i]) - tau;
        out[i] = mag > 0.0 ? (z[i] > 0.0 ? mag : -mag) : 0.0;
    }
    return out;
}

Tensor soft_threshold(const Tensor& z, double tau) {
    return Tensor(z.shape(), soft_threshold(z.values(), tau));
}

std::vector<double> prox_group(const std::vector<double>& theta, double step, double lambda, double alpha) {
    if (theta.empty()) throw std::domain_error("prox over an empty group");
    if (!(step > 0.0)) throw std::domain_error("prox step must be positive, got " + std::to_string(step));
    if (!(lambda >= 0.0)) throw std::domain_error("lambda must be non-negative, got " + std::to_string(lambda));
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::domain_error("alpha must lie in [0, 1], got " + std::to_string(alpha));
    }
    if (lambda == 0.0) return theta;

    std::vector<double> z = soft_threshold(theta, step * alpha * lambda);
    const double kill = step * (1.0 - alpha) * lambda * std::sqrt(static_cast<double>(theta.size()));
    if (kill == 0.0) return z;  // alpha == 1: lasso only, no group clamp
    const double norm = l2_norm(z.data(), z.size());
    if (norm <= kill) return std::vector<double>(theta.size(), 0.0);
    const double shrink = 1.0 - kill / norm;
    for (double& v : z) v *= shrink;
    return z;
}

ProxOutcome prox_all(Network& net, const RegularizerConfig& cfg, double step) {
    cfg.validate(net.spec());
    if (!(step > 0.0)) throw std::domain_error("prox step must be positive, got " + std::to_string(step));
    ProxOutcome out;
    out.zeroed.resize(net.spec().layers.size());
    const std::vector<std::size_t> layers = regularized_layers(net.spec());
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::size_t l = layers[i];
        const double lambda = cfg.per_layer_lambda[i];
        if (lambda == 0.0) continue;
        LayerParams& groups = net.params()[l];
        for (std::size_t n = 0; n < groups.size(); ++n) {
            groups[n].unflatten(prox_group(groups[n].flatten(), step, lambda, cfg.alpha));
            if (groups[n].is_zero()) {
                out.zeroed[l].push_back(n);
                ++out.zeroed_total;
            }
        }
    }
    return out;
}

}  // namespace slimnet
