#include "slimnet/experiment.hpp"

#include <filesystem>
#include <fstream>

#include "slimnet/checkpoint.hpp"
#include "slimnet/detail/json_util.hpp"
#include "slimnet/errors.hpp"
#include "slimnet/pruner.hpp"

namespace slimnet {

namespace {

using detail::ordered_json;

void parse_data(ExperimentConfig& cfg, const ordered_json& j) {
    const std::string source = detail::get_string(j, "source", "data");
    if (source == "synthetic") {
        detail::reject_unknown_keys(
            j, {"source", "input_dim", "teacher_hidden", "classes", "train_count", "val_count", "seed"}, "data");
        cfg.source = ExperimentConfig::Source::synthetic;
        const std::size_t derived_dim =
            cfg.network.input_shape.size() == 1 ? cfg.network.input_shape[0] : 0;
        cfg.synth.input_dim = detail::get_size_or(j, "input_dim", derived_dim, "data");
        if (cfg.network.input_shape != std::vector<std::size_t>{cfg.synth.input_dim}) {
            throw ConfigError("data.input_dim: synthetic inputs are [" + std::to_string(cfg.synth.input_dim) +
                              "], network expects " + Tensor::shape_str(cfg.network.input_shape));
        }
        cfg.synth.teacher_hidden = detail::get_size_or(j, "teacher_hidden", 8, "data");
        std::size_t derived_classes = 0;
        for (const LayerSpec& layer : cfg.network.layers) {
            if (layer.kind == LayerKind::classifier) derived_classes = layer.neurons;
        }
        cfg.synth.classes = detail::get_size_or(j, "classes", derived_classes, "data");
        cfg.synth.seed = detail::get_size_or(j, "seed", 1, "data");
        cfg.train_count = detail::get_size(j, "train_count", "data");
        cfg.val_count = detail::get_size_or(j, "val_count", 0, "data");
        if (cfg.train_count == 0) throw ConfigError("data.train_count: must be positive");
    } else if (source == "idx") {
        detail::reject_unknown_keys(j, {"source", "train_images", "train_labels", "val_images", "val_labels"}, "data");
        cfg.source = ExperimentConfig::Source::idx;
        cfg.train_images = detail::get_string(j, "train_images", "data");
        cfg.train_labels = detail::get_string(j, "train_labels", "data");
        const bool has_vi = j.contains("val_images");
        const bool has_vl = j.contains("val_labels");
        if (has_vi != has_vl) throw ConfigError("data: val_images and val_labels must be given together");
        if (has_vi) {
            cfg.val_images = detail::get_string(j, "val_images", "data");
            cfg.val_labels = detail::get_string(j, "val_labels", "data");
        }
    } else if (source == "csv") {
        detail::reject_unknown_keys(j, {"source", "train", "val"}, "data");
        cfg.source = ExperimentConfig::Source::csv;
        cfg.train_csv = detail::get_string(j, "train", "data");
        if (j.contains("val")) cfg.val_csv = detail::get_string(j, "val", "data");
    } else {
        throw ConfigError("data.source: unknown source '" + source + "'");
    }
}

void parse_training(TrainingConfig& t, const ordered_json& j) {
    detail::reject_unknown_keys(j,
                                {"epochs", "batch_size", "batches_per_epoch", "initial_lr", "momentum",
                                 "lr_drop_epochs", "lr_drop_factor", "weight_decay", "freeze_killed", "seed",
                                 "divergence_limit"},
                                "training");
    t.epochs = detail::get_size(j, "epochs", "training");
    t.batch_size = detail::get_size(j, "batch_size", "training");
    t.batches_per_epoch = detail::get_size_or(j, "batches_per_epoch", 0, "training");
    t.initial_lr = detail::get_double(j, "initial_lr", "training");
    t.momentum = detail::get_double_or(j, "momentum", 0.0, "training");
    if (j.contains("lr_drop_epochs")) {
        const auto& drops = j.at("lr_drop_epochs");
        if (!drops.is_array()) throw ConfigError("training.lr_drop_epochs: expected an array");
        for (const auto& e : drops) {
            if (!e.is_number_unsigned() || e.get<std::uint64_t>() == 0) {
                throw ConfigError("training.lr_drop_epochs: expected positive epoch numbers");
            }
            t.lr_drop_epochs.push_back(e.get<std::size_t>());
        }
    }
    t.lr_drop_factor = detail::get_double_or(j, "lr_drop_factor", 0.1, "training");
    t.weight_decay = detail::get_double_or(j, "weight_decay", 0.0, "training");
    t.freeze_killed = detail::get_bool_or(j, "freeze_killed", true, "training");
    t.seed = detail::get_size_or(j, "seed", 0, "training");
    t.divergence_limit = detail::get_double_or(j, "divergence_limit", 1e6, "training");
    t.validate();
}

void parse_regularizer(RegularizerConfig& r, const ordered_json& j, const NetworkSpec& network) {
    detail::reject_unknown_keys(j, {"alpha", "lambda", "lambda_small", "lambda_large", "prefix_layers",
                                    "per_layer_lambda"},
                                "regularizer");
    r.alpha = detail::get_double_or(j, "alpha", 0.0, "regularizer");
    const std::size_t n = regularized_layers(network).size();
    const bool has_list = j.contains("per_layer_lambda");
    const bool has_uniform = j.contains("lambda");
    const bool has_tiers = j.contains("lambda_small") || j.contains("lambda_large");
    if (static_cast<int>(has_list) + static_cast<int>(has_uniform) + static_cast<int>(has_tiers) > 1) {
        throw ConfigError("regularizer: give per_layer_lambda, lambda, or lambda_small/lambda_large, not a mix");
    }
    if (has_list) {
        const auto& list = j.at("per_layer_lambda");
        if (!list.is_array()) throw ConfigError("regularizer.per_layer_lambda: expected an array");
        for (const auto& v : list) {
            if (!v.is_number()) throw ConfigError("regularizer.per_layer_lambda: expected numbers");
            r.per_layer_lambda.push_back(v.get<double>());
        }
    } else if (has_uniform) {
        r.per_layer_lambda.assign(n, detail::get_double(j, "lambda", "regularizer"));
    } else if (has_tiers) {
        const double small = detail::get_double(j, "lambda_small", "regularizer");
        const double large = detail::get_double(j, "lambda_large", "regularizer");
        const std::size_t prefix = detail::get_size_or(j, "prefix_layers", 1, "regularizer");
        if (prefix > n) {
            throw ConfigError("regularizer.prefix_layers: network has only " + std::to_string(n) +
                              " penalized layers, got " + std::to_string(prefix));
        }
        r.per_layer_lambda.assign(prefix, small);
        r.per_layer_lambda.resize(n, large);
    } else {
        r.per_layer_lambda.assign(n, 0.0);
    }
    r.validate(network);
}

std::pair<Dataset, std::optional<Dataset>> load_datasets(const ExperimentConfig& cfg) {
    switch (cfg.source) {
        case ExperimentConfig::Source::synthetic: {
            // One draw covers both splits so they share the teacher and stay
            // disjoint.
            SynthConfig scfg = cfg.synth;
            scfg.count = cfg.train_count + cfg.val_count;
            SynthResult synth = synth_teacher_student(scfg);
            auto [train, rest] = split_dataset(synth.data, cfg.train_count);
            std::optional<Dataset> val;
            if (cfg.val_count > 0) val = std::move(rest);
            return {std::move(train), std::move(val)};
        }
        case ExperimentConfig::Source::idx: {
            Dataset train = load_idx(cfg.train_images, cfg.train_labels);
            std::optional<Dataset> val;
            if (!cfg.val_images.empty()) val = load_idx(cfg.val_images, cfg.val_labels);
            return {std::move(train), std::move(val)};
        }
        case ExperimentConfig::Source::csv: {
            Dataset train = load_csv(cfg.train_csv);
            std::optional<Dataset> val;
            if (!cfg.val_csv.empty()) val = load_csv(cfg.val_csv);
            return {std::move(train), std::move(val)};
        }
    }
    throw ConfigError("data.source: unhandled source");
}

TrainingResult run_one(const ExperimentConfig& cfg, const Dataset& train_set, const Dataset* val_set,
                       const RegularizerConfig& rcfg, const std::string& log_path, const EpochCallback& on_epoch) {
    Network net = Network::random_init(cfg.network, cfg.training.seed);
    std::ofstream log;
    if (!log_path.empty()) {
        log.open(log_path, std::ios::trunc);
        if (!log) throw ConfigError("cannot open '" + log_path + "' for writing");
    }
    return train(std::move(net), train_set, val_set, cfg.training, rcfg, log.is_open() ? &log : nullptr, on_epoch);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("experiment: invalid JSON: ") + e.what());
    }
    detail::reject_unknown_keys(
        j, {"network", "data", "training", "regularizer", "paired_baseline", "checkpoint_every", "output_dir"},
        "experiment");

    ExperimentConfig cfg;
    cfg.network = NetworkSpec::from_json(detail::require_field(j, "network", "experiment").dump());
    cfg.network.validate_for_training();
    parse_data(cfg, detail::require_field(j, "data", "experiment"));
    parse_training(cfg.training, detail::require_field(j, "training", "experiment"));
    if (j.contains("regularizer")) {
        parse_regularizer(cfg.regularizer, j.at("regularizer"), cfg.network);
    } else {
        cfg.regularizer = RegularizerConfig::none(cfg.network);
    }
    cfg.paired_baseline = detail::get_bool_or(j, "paired_baseline", false, "experiment");
    cfg.checkpoint_every = detail::get_size_or(j, "checkpoint_every", 0, "experiment");
    if (j.contains("output_dir")) cfg.output_dir = detail::get_string(j, "output_dir", "experiment");
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const auto [train_set, val_set] = load_datasets(cfg);
    const Dataset* val = val_set ? &*val_set : nullptr;

    std::string ckpt_path, log_path, base_ckpt_path, base_log_path;
    EpochCallback on_epoch;
    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        const std::filesystem::path dir(cfg.output_dir);
        ckpt_path = (dir / "checkpoint.bin").string();
        log_path = (dir / "log.jsonl").string();
        base_ckpt_path = (dir / "baseline_checkpoint.bin").string();
        base_log_path = (dir / "baseline_log.jsonl").string();
        if (cfg.checkpoint_every > 0) {
            const std::size_t every = cfg.checkpoint_every;
            on_epoch = [dir, every](const Network& net, const EpochStats& stats) {
                if (stats.epoch % every == 0) {
                    save_checkpoint(net, (dir / ("checkpoint_epoch_" + std::to_string(stats.epoch) + ".bin")).string());
                }
            };
        }
    }

    ExperimentResult result;
    result.primary = run_one(cfg, train_set, val, cfg.regularizer, log_path, on_epoch);
    result.zeroed_neurons = detect_dead(result.primary.net).total;
    if (val) result.val_accuracy = evaluate(result.primary.net, *val);
    if (!ckpt_path.empty()) save_checkpoint(result.primary.net, ckpt_path);

    if (cfg.paired_baseline) {
        const RegularizerConfig none = RegularizerConfig::none(cfg.network);
        result.baseline = run_one(cfg, train_set, val, none, base_log_path, {});
        if (val) result.baseline_val_accuracy = evaluate(result.baseline->net, *val);
        if (!base_ckpt_path.empty()) save_checkpoint(result.baseline->net, base_ckpt_path);

        // Accounting against the unpenalized twin; accuracies come from the
        // validation split when there is one.
        const Dataset& eval_set = val ? *val : train_set;
        const CompactionResult comp = compact(result.primary.net);
        const double acc_regularized = evaluate(comp.net, eval_set);
        const double acc_baseline = evaluate(result.baseline->net, eval_set);
        result.report = make_report(result.primary.net, comp.net, acc_regularized, acc_baseline);
        if (!cfg.output_dir.empty()) {
            const std::filesystem::path dir(cfg.output_dir);
            std::ofstream rj((dir / "report.json").string(), std::ios::trunc);
            rj << report_json(*result.report);
            std::ofstream rt((dir / "report.txt").string(), std::ios::trunc);
            rt << report_text(*result.report);
            if (!rj || !rt) throw ConfigError("failed writing reports under '" + cfg.output_dir + "'");
        }
    }
    return result;
}

}  // namespace slimnet
