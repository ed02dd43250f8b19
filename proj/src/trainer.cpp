#include "slimnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "slimnet/detail/json_util.hpp"
#include "slimnet/errors.hpp"

namespace slimnet {

void TrainingConfig::validate() const {
    if (batch_size == 0) throw ConfigError("training.batch_size: must be positive");
    if (!(initial_lr > 0.0 && std::isfinite(initial_lr))) {
        throw ConfigError("training.initial_lr: must be positive and finite");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("training.momentum: expected a value in [0, 1)");
    if (!(lr_drop_factor > 0.0 && lr_drop_factor <= 1.0)) {
        throw ConfigError("training.lr_drop_factor: expected a value in (0, 1]");
    }
    if (!(weight_decay >= 0.0 && std::isfinite(weight_decay))) {
        throw ConfigError("training.weight_decay: must be non-negative and finite");
    }
    if (!(divergence_limit > 0.0)) throw ConfigError("training.divergence_limit: must be positive");
    std::size_t prev = 0;
    for (std::size_t e : lr_drop_epochs) {
        if (e == 0) throw ConfigError("training.lr_drop_epochs: epochs are 1-based, got 0");
        if (e <= prev) throw ConfigError("training.lr_drop_epochs: must be strictly increasing");
        if (e > epochs) {
            throw ConfigError("training.lr_drop_epochs: epoch " + std::to_string(e) + " is beyond the " +
                              std::to_string(epochs) + "-epoch run");
        }
        prev = e;
    }
}

BatchSampler::BatchSampler(std::size_t n, std::size_t batch_size, std::uint64_t seed)
    : n_(n), batch_(batch_size), rng_(seed) {
    if (n == 0) throw ConfigError("batch sampler over an empty dataset");
    if (batch_size == 0) throw ConfigError("batch sampler with a zero batch size");
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::shuffle(order_.begin(), order_.end(), rng_);
}

std::vector<std::size_t> BatchSampler::next() {
    std::vector<std::size_t> batch;
    batch.reserve(batch_);
    while (batch.size() < batch_) {
        if (pos_ == n_) {
            std::shuffle(order_.begin(), order_.end(), rng_);
            pos_ = 0;
        }
        batch.push_back(order_[pos_++]);
    }
    return batch;
}

namespace {

void check_dataset_against(const Network& net, const Dataset& data, const char* which) {
    data.validate();
    if (data.size() == 0) throw ConfigError(std::string(which) + " dataset is empty");
    if (data.inputs[0].shape() != net.input_shape()) {
        throw ShapeError(std::string(which) + " inputs are " + data.inputs[0].shape_str() + ", network expects " +
                         Tensor::shape_str(net.input_shape()));
    }
    const std::size_t classes = net.output_shape()[0];
    for (std::size_t l : data.labels) {
        if (l >= classes) {
            throw ConfigError(std::string(which) + " label " + std::to_string(l) + " out of range for " +
                              std::to_string(classes) + " classes");
        }
    }
}

void log_epoch(std::ostream& log, const EpochStats& s) {
    detail::ordered_json j;
    j["epoch"] = s.epoch;
    j["learning_rate"] = s.learning_rate;
    j["train_loss"] = s.train_loss;
    j["train_accuracy"] = s.train_accuracy;
    j["penalty"] = s.penalty;
    j["objective"] = s.objective;
    j["zeroed_per_layer"] = s.zeroed_per_layer;
    j["zeroed_total"] = s.zeroed_total;
    if (s.val_accuracy) j["val_accuracy"] = *s.val_accuracy;
    log << j.dump() << '\n';
}

// All-zero groups in each penalized (parameterized non-classifier) layer,
// regardless of whether the prox or plain optimization zeroed them.
std::vector<std::size_t> zeroed_counts(const Network& net) {
    std::vector<std::size_t> counts;
    for (std::size_t l : regularized_layers(net.spec())) {
        std::size_t dead = 0;
        for (const NeuronGroup& g : net.params()[l]) {
            if (g.is_zero()) ++dead;
        }
        counts.push_back(dead);
    }
    return counts;
}

}  // namespace

TrainingResult train(Network net, const Dataset& train_set, const Dataset* val_set, const TrainingConfig& tcfg,
                     const RegularizerConfig& rcfg, std::ostream* log, const EpochCallback& on_epoch) {
    tcfg.validate();
    net.spec().validate_for_training();
    rcfg.validate(net.spec());
    check_dataset_against(net, train_set, "train");
    if (val_set) check_dataset_against(net, *val_set, "validation");

    const std::size_t batches_per_epoch =
        tcfg.batches_per_epoch > 0 ? tcfg.batches_per_epoch : (train_set.size() + tcfg.batch_size - 1) / tcfg.batch_size;

    std::vector<LayerParams> velocity = net.zero_like_params();
    std::vector<std::vector<char>> frozen(net.params().size());
    for (std::size_t l = 0; l < net.params().size(); ++l) frozen[l].assign(net.params()[l].size(), 0);

    BatchSampler sampler(train_set.size(), tcfg.batch_size, tcfg.seed);
    double lr = tcfg.initial_lr;

    TrainingResult result;
    for (std::size_t epoch = 1; epoch <= tcfg.epochs; ++epoch) {
        if (std::find(tcfg.lr_drop_epochs.begin(), tcfg.lr_drop_epochs.end(), epoch) != tcfg.lr_drop_epochs.end()) {
            lr *= tcfg.lr_drop_factor;
        }

        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < batches_per_epoch; ++b) {
            const std::vector<std::size_t> batch = sampler.next();
            std::vector<LayerParams> grads = net.zero_like_params();
            double batch_loss = 0.0;
            for (std::size_t idx : batch) {
                const ForwardTrace trace = forward(net, train_set.inputs[idx]);
                batch_loss += loss_value(net.spec().loss, trace.output, train_set.labels[idx]);
                const std::vector<LayerParams> g =
                    backward(net, trace, loss_gradient(net.spec().loss, trace.output, train_set.labels[idx]));
                for (std::size_t l = 0; l < g.size(); ++l) {
                    for (std::size_t n = 0; n < g[l].size(); ++n) {
                        for (std::size_t i = 0; i < g[l][n].weights.numel(); ++i) {
                            grads[l][n].weights[i] += g[l][n].weights[i];
                        }
                        grads[l][n].bias += g[l][n].bias;
                    }
                }
            }
            batch_loss /= static_cast<double>(batch.size());
            if (!std::isfinite(batch_loss) || batch_loss > tcfg.divergence_limit) {
                throw DivergenceError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                                      std::to_string(b) + ": mean loss " + std::to_string(batch_loss));
            }
            epoch_loss += batch_loss;

            const double inv = 1.0 / static_cast<double>(batch.size());
            for (std::size_t l = 0; l < net.params().size(); ++l) {
                for (std::size_t n = 0; n < net.params()[l].size(); ++n) {
                    if (frozen[l][n]) continue;
                    NeuronGroup& p = net.params()[l][n];
                    NeuronGroup& v = velocity[l][n];
                    const NeuronGroup& g = grads[l][n];
                    for (std::size_t i = 0; i < p.weights.numel(); ++i) {
                        double gi = g.weights[i] * inv;
                        if (tcfg.weight_decay != 0.0) gi += tcfg.weight_decay * p.weights[i];
                        v.weights[i] = tcfg.momentum * v.weights[i] - lr * gi;
                        p.weights[i] += v.weights[i];
                    }
                    double gb = g.bias * inv;
                    if (tcfg.weight_decay != 0.0) gb += tcfg.weight_decay * p.bias;
                    v.bias = tcfg.momentum * v.bias - lr * gb;
                    p.bias += v.bias;
                }
            }
        }

        const ProxOutcome outcome = prox_all(net, rcfg, lr);
        if (tcfg.freeze_killed) {
            for (std::size_t l = 0; l < outcome.zeroed.size(); ++l) {
                for (std::size_t n : outcome.zeroed[l]) {
                    frozen[l][n] = 1;
                    velocity[l][n].weights = Tensor(velocity[l][n].weights.shape());
                    velocity[l][n].bias = 0.0;
                }
            }
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.learning_rate = lr;
        stats.train_loss = batches_per_epoch > 0 ? epoch_loss / static_cast<double>(batches_per_epoch) : 0.0;
        stats.train_accuracy = evaluate(net, train_set);
        stats.penalty = regularizer_value(net, rcfg);
        stats.objective = stats.train_loss + stats.penalty;
        stats.zeroed_per_layer = zeroed_counts(net);
        stats.zeroed_total = 0;
        for (std::size_t c : stats.zeroed_per_layer) stats.zeroed_total += c;
        if (val_set) stats.val_accuracy = evaluate(net, *val_set);
        if (log) log_epoch(*log, stats);
        if (on_epoch) on_epoch(net, stats);
        result.history.push_back(std::move(stats));
    }

    result.net = std::move(net);
    return result;
}

double evaluate(const Network& net, const Dataset& data) {
    data.validate();
    if (data.size() == 0) throw std::domain_error("evaluate over an empty dataset");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (argmax_index(predict(net, data.inputs[i])) == data.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace slimnet
