#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "slimnet/network.hpp"
#include "slimnet/tensor.hpp"

namespace slimnet {

/// Labeled classification samples. Inputs share one shape; labels are class
/// indices in [0, class_count).
struct Dataset {
    std::vector<Tensor> inputs;
    std::vector<std::size_t> labels;
    /// Number of classes; 0 means "derive from the labels" (max + 1).
    std::size_t class_count = 0;
    /// Which split this set belongs to ("train", "validation", "test", or "").
    std::string split;

    std::size_t size() const { return inputs.size(); }

    /// class_count when set, otherwise max label + 1 (zero for an empty set).
    std::size_t num_classes() const;

    /// Throws ShapeError on mismatched sizes or inconsistent input shapes and
    /// ConfigError on labels outside [0, class_count).
    void validate() const;
};

/// Split off the first `head_count` samples into one set and the rest into
/// another; the two are disjoint by construction. Tags default to
/// train/validation. Throws ConfigError if head_count exceeds the size.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, std::size_t head_count,
                                          const std::string& head_tag = "train",
                                          const std::string& tail_tag = "validation");

/// IDX image/label pair (the big-endian format used by digit benchmarks).
/// Pixels are scaled to [0, 1]; every image becomes a [1, rows, cols]
/// tensor. Malformed files raise FormatError with the failing byte offset.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Inverse of load_idx: values are clamped to [0, 1] and quantized to bytes.
void save_idx(const Dataset& data, const std::string& images_path, const std::string& labels_path);

/// CSV rows of the form `label,f0,f1,...` with a consistent column count;
/// inputs become rank-1 tensors. Errors name the failing line.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& data, const std::string& path);

/// Synthetic classification task: labels come from a fixed randomly
/// initialized teacher network, so a larger student can overfit cleanly and
/// the surplus capacity is genuinely redundant.
struct SynthConfig {
    std::size_t input_dim = 16;
    std::size_t teacher_hidden = 8;
    std::size_t classes = 4;
    std::size_t count = 1000;
    std::uint64_t seed = 1;

    /// Requires teacher_hidden >= classes and count >= 10 * teacher_hidden.
    void validate() const;
};

struct SynthResult {
    Dataset data;
    Network teacher;
};

/// Draw `count` standard-normal inputs and label them with the teacher's
/// argmax. Everything is a pure function of the config: the inputs are fixed
/// by the seed, and if a candidate teacher never produces some class on them
/// it is re-rolled with an incremented sub-seed (at most 100 attempts, then
/// ContractError). The teacher that labeled the data is returned with it.
SynthResult synth_teacher_student(const SynthConfig& cfg);

}  // namespace slimnet
