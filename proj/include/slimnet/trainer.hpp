#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "slimnet/data.hpp"
#include "slimnet/network.hpp"
#include "slimnet/regularization.hpp"

namespace slimnet {

struct TrainingConfig {
    std::size_t epochs = 1;
    std::size_t batch_size = 32;
    std::size_t batches_per_epoch = 0;  // 0: ceil(train size / batch_size)
    double initial_lr = 0.1;
    double momentum = 0.0;
    std::vector<std::size_t> lr_drop_epochs;  // 1-based, strictly increasing
    double lr_drop_factor = 0.1;
    double weight_decay = 0.0;
    bool freeze_killed = true;  // stop updating groups the prox zeroed
    std::uint64_t seed = 0;
    double divergence_limit = 1e6;

    void validate() const;
};

/// Deterministic without-replacement index stream: shuffles [0, n) under the
/// seed, deals consecutive slices, reshuffles whenever the pool runs dry.
/// Public so reference training loops can replay the exact same batches.
class BatchSampler {
public:
    BatchSampler(std::size_t n, std::size_t batch_size, std::uint64_t seed);
    std::vector<std::size_t> next();

private:
    std::size_t n_;
    std::size_t batch_;
    std::size_t pos_ = 0;
    std::mt19937_64 rng_;
    std::vector<std::size_t> order_;
};

struct EpochStats {
    std::size_t epoch = 0;  // 1-based
    double learning_rate = 0.0;
    double train_loss = 0.0;      // mean data loss over the epoch's batches
    double train_accuracy = 0.0;  // full train set, after the epoch's prox
    double penalty = 0.0;         // regularizer value after the epoch's prox
    double objective = 0.0;       // train_loss + penalty
    std::vector<std::size_t> zeroed_per_layer;  // all-zero groups per penalized layer
    std::size_t zeroed_total = 0;
    std::optional<double> val_accuracy;
};

struct TrainingResult {
    Network net;
    std::vector<EpochStats> history;
};

/// Called after each epoch's proximal sweep; used for periodic checkpoints.
using EpochCallback = std::function<void(const Network&, const EpochStats&)>;

/// Minibatch momentum SGD on the data loss with a proximal sweep at the end
/// of every epoch, using the current learning rate as the prox step. With
/// all strengths zero the parameter trajectory is exactly plain momentum
/// SGD. When `log` is given, one JSON line per epoch is appended to it.
/// Throws DivergenceError when a batch loss goes non-finite or exceeds the
/// divergence limit.
TrainingResult train(Network net, const Dataset& train_set, const Dataset* val_set, const TrainingConfig& tcfg,
                     const RegularizerConfig& rcfg, std::ostream* log = nullptr, const EpochCallback& on_epoch = {});

/// Fraction of samples whose argmax prediction matches the label.
double evaluate(const Network& net, const Dataset& data);

}  // namespace slimnet
