#include "slimnet/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "slimnet/errors.hpp"
#include "slimnet/network.hpp"

namespace slimnet {

std::size_t Dataset::num_classes() const {
    if (class_count > 0) return class_count;
    std::size_t top = 0;
    for (std::size_t l : labels) top = std::max(top, l + 1);
    return top;
}

void Dataset::validate() const {
    if (inputs.size() != labels.size()) {
        throw ShapeError("dataset holds " + std::to_string(inputs.size()) + " inputs but " +
                         std::to_string(labels.size()) + " labels");
    }
    for (std::size_t i = 1; i < inputs.size(); ++i) {
        if (!inputs[i].same_shape(inputs[0])) {
            throw ShapeError("dataset input " + std::to_string(i) + " has shape " + inputs[i].shape_str() +
                             ", expected " + inputs[0].shape_str());
        }
    }
    if (class_count > 0) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] >= class_count) {
                throw ConfigError("dataset label " + std::to_string(labels[i]) + " at index " + std::to_string(i) +
                                  " is outside [0, " + std::to_string(class_count) + ")");
            }
        }
    }
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, std::size_t head_count, const std::string& head_tag,
                                          const std::string& tail_tag) {
    if (head_count > data.size()) {
        throw ConfigError("cannot split off " + std::to_string(head_count) + " samples from a dataset of " +
                          std::to_string(data.size()));
    }
    Dataset head, tail;
    head.class_count = tail.class_count = data.class_count;
    head.split = head_tag;
    tail.split = tail_tag;
    head.inputs.assign(data.inputs.begin(), data.inputs.begin() + static_cast<std::ptrdiff_t>(head_count));
    head.labels.assign(data.labels.begin(), data.labels.begin() + static_cast<std::ptrdiff_t>(head_count));
    tail.inputs.assign(data.inputs.begin() + static_cast<std::ptrdiff_t>(head_count), data.inputs.end());
    tail.labels.assign(data.labels.begin() + static_cast<std::ptrdiff_t>(head_count), data.labels.end());
    return {std::move(head), std::move(tail)};
}

// ---------------------------------------------------------------------------
// IDX
// ---------------------------------------------------------------------------

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::uint32_t be32(const std::vector<std::uint8_t>& bytes, std::size_t at, const std::string& path) {
    if (at + 4 > bytes.size()) {
        throw FormatError(path + ": truncated at offset " + std::to_string(at) + ": expected a 4-byte field");
    }
    return (static_cast<std::uint32_t>(bytes[at]) << 24) | (static_cast<std::uint32_t>(bytes[at + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[at + 2]) << 8) | static_cast<std::uint32_t>(bytes[at + 3]);
}

void put_be32(std::ofstream& out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                       static_cast<char>(v)};
    out.write(b, 4);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    const std::vector<std::uint8_t> img = read_file(images_path);
    const std::uint32_t img_magic = be32(img, 0, images_path);
    if (img_magic != 0x00000803) {
        throw FormatError(images_path + ": bad magic at offset 0 (expected 0x00000803)");
    }
    const std::uint32_t count = be32(img, 4, images_path);
    const std::uint32_t rows = be32(img, 8, images_path);
    const std::uint32_t cols = be32(img, 12, images_path);
    if (rows == 0 || cols == 0) throw FormatError(images_path + ": zero image extent at offset 8");
    const std::size_t need = 16 + static_cast<std::size_t>(count) * rows * cols;
    if (img.size() < need) {
        throw FormatError(images_path + ": truncated at offset " + std::to_string(img.size()) + ": expected " +
                          std::to_string(need) + " bytes");
    }

    const std::vector<std::uint8_t> lab = read_file(labels_path);
    const std::uint32_t lab_magic = be32(lab, 0, labels_path);
    if (lab_magic != 0x00000801) {
        throw FormatError(labels_path + ": bad magic at offset 0 (expected 0x00000801)");
    }
    const std::uint32_t lab_count = be32(lab, 4, labels_path);
    if (lab_count != count) {
        throw FormatError(labels_path + ": label count " + std::to_string(lab_count) + " at offset 4 does not match " +
                          std::to_string(count) + " images");
    }
    if (lab.size() < 8 + static_cast<std::size_t>(lab_count)) {
        throw FormatError(labels_path + ": truncated at offset " + std::to_string(lab.size()) + ": expected " +
                          std::to_string(8 + lab_count) + " bytes");
    }

    Dataset data;
    data.inputs.reserve(count);
    data.labels.reserve(count);
    std::size_t at = 16;
    for (std::uint32_t i = 0; i < count; ++i) {
        Tensor t({1, rows, cols});
        for (std::size_t j = 0; j < static_cast<std::size_t>(rows) * cols; ++j) {
            t[j] = static_cast<double>(img[at++]) / 255.0;
        }
        data.inputs.push_back(std::move(t));
        data.labels.push_back(lab[8 + i]);
    }
    return data;
}

void save_idx(const Dataset& data, const std::string& images_path, const std::string& labels_path) {
    data.validate();
    if (data.size() == 0) throw ConfigError("refusing to write an empty IDX pair");
    const Tensor& first = data.inputs[0];
    if (first.rank() != 3 || first.shape()[0] != 1) {
        throw ShapeError("IDX images must be [1, rows, cols], got " + first.shape_str());
    }
    for (std::size_t l : data.labels) {
        if (l > 255) throw ConfigError("IDX labels are bytes; got label " + std::to_string(l));
    }

    std::ofstream img(images_path, std::ios::binary | std::ios::trunc);
    if (!img) throw ConfigError("cannot open '" + images_path + "' for writing");
    put_be32(img, 0x00000803);
    put_be32(img, static_cast<std::uint32_t>(data.size()));
    put_be32(img, static_cast<std::uint32_t>(first.shape()[1]));
    put_be32(img, static_cast<std::uint32_t>(first.shape()[2]));
    for (const Tensor& t : data.inputs) {
        for (double v : t.values()) {
            const double clamped = std::min(1.0, std::max(0.0, v));
            img.put(static_cast<char>(std::lround(clamped * 255.0)));
        }
    }
    if (!img) throw ConfigError("failed writing '" + images_path + "'");

    std::ofstream lab(labels_path, std::ios::binary | std::ios::trunc);
    if (!lab) throw ConfigError("cannot open '" + labels_path + "' for writing");
    put_be32(lab, 0x00000801);
    put_be32(lab, static_cast<std::uint32_t>(data.size()));
    for (std::size_t l : data.labels) lab.put(static_cast<char>(l));
    if (!lab) throw ConfigError("failed writing '" + labels_path + "'");
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    Dataset data;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(row, cell, ',')) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(cell, &used));
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw FormatError(path + ": line " + std::to_string(line_no) + ": '" + cell + "' is not a number");
            }
        }
        if (values.size() < 2) {
            throw FormatError(path + ": line " + std::to_string(line_no) + ": expected `label,f0,...`");
        }
        const double label = values.front();
        if (label < 0 || label != std::floor(label)) {
            throw FormatError(path + ": line " + std::to_string(line_no) + ": label must be a non-negative integer");
        }
        if (width == 0) {
            width = values.size();
        } else if (values.size() != width) {
            throw FormatError(path + ": line " + std::to_string(line_no) + ": expected " + std::to_string(width - 1) +
                              " features, got " + std::to_string(values.size() - 1));
        }
        data.labels.push_back(static_cast<std::size_t>(label));
        data.inputs.push_back(Tensor::of(std::vector<double>(values.begin() + 1, values.end())));
    }
    if (data.size() == 0) throw FormatError(path + ": no samples");
    return data;
}

void save_csv(const Dataset& data, const std::string& path) {
    data.validate();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out.precision(17);
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << data.labels[i];
        for (double v : data.inputs[i].values()) out << ',' << v;
        out << '\n';
    }
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Synthetic teacher labels
// ---------------------------------------------------------------------------

void SynthConfig::validate() const {
    if (input_dim == 0) throw ConfigError("data.input_dim: must be positive");
    if (classes < 2) throw ConfigError("data.classes: need at least 2 classes");
    if (teacher_hidden < classes) {
        throw ConfigError("data.teacher_hidden: teacher needs at least as many hidden neurons (" +
                          std::to_string(teacher_hidden) + ") as classes (" + std::to_string(classes) + ")");
    }
    if (count < 10 * teacher_hidden) {
        throw ConfigError("data.count: need at least 10 samples per teacher neuron (" +
                          std::to_string(10 * teacher_hidden) + "), got " + std::to_string(count));
    }
}

namespace {

// splitmix64-style mixing so sample and teacher streams never collide.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

NetworkSpec teacher_spec(const SynthConfig& cfg) {
    NetworkSpec spec;
    spec.input_shape = {cfg.input_dim};
    spec.layers = {LayerSpec::dense_layer(cfg.teacher_hidden), LayerSpec::activation(),
                   LayerSpec::classifier_layer(cfg.classes)};
    return spec;
}

}  // namespace

SynthResult synth_teacher_student(const SynthConfig& cfg) {
    cfg.validate();

    // The inputs depend only on the seed; teacher attempts relabel the same
    // points.
    std::vector<Tensor> inputs;
    inputs.reserve(cfg.count);
    std::mt19937_64 rng(mix_seed(cfg.seed, 0));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < cfg.count; ++i) {
        Tensor x({cfg.input_dim});
        for (double& v : x.values()) v = gauss(rng);
        inputs.push_back(std::move(x));
    }

    constexpr std::size_t kAttempts = 100;
    for (std::size_t attempt = 0; attempt < kAttempts; ++attempt) {
        Network teacher = Network::random_init(teacher_spec(cfg), mix_seed(cfg.seed, 1 + attempt));
        std::vector<std::size_t> labels;
        labels.reserve(cfg.count);
        std::vector<std::size_t> seen(cfg.classes, 0);
        for (const Tensor& x : inputs) {
            const std::size_t label = argmax_index(predict(teacher, x));
            ++seen[label];
            labels.push_back(label);
        }
        if (std::all_of(seen.begin(), seen.end(), [](std::size_t c) { return c > 0; })) {
            SynthResult result;
            result.data.inputs = std::move(inputs);
            result.data.labels = std::move(labels);
            result.data.class_count = cfg.classes;
            result.teacher = std::move(teacher);
            return result;
        }
    }
    throw ContractError("every candidate teacher left some class empty after " + std::to_string(kAttempts) +
                        " attempts with seed " + std::to_string(cfg.seed));
}

}  // namespace slimnet
