#pragma once

#include <optional>
#include <string>

#include "slimnet/data.hpp"
#include "slimnet/pruner.hpp"
#include "slimnet/trainer.hpp"

namespace slimnet {

/// A complete training run described by one JSON document: architecture,
/// data source, optimizer schedule, penalty strengths, artifact directory.
struct ExperimentConfig {
    enum class Source { synthetic, idx, csv };

    NetworkSpec network;

    Source source = Source::synthetic;
    SynthConfig synth;  // synthetic: counts live below
    std::size_t train_count = 0;
    std::size_t val_count = 0;
    std::string train_images, train_labels, val_images, val_labels;  // idx
    std::string train_csv, val_csv;                                  // csv

    TrainingConfig training;
    RegularizerConfig regularizer;  // resolved to per-layer strengths

    /// Also run an identical twin with every strength zero and report the
    /// sparsity accounting against it.
    bool paired_baseline = false;

    /// Write checkpoint_epoch_<n>.bin every n epochs (0 disables).
    std::size_t checkpoint_every = 0;

    /// Where checkpoint.bin / log.jsonl land; empty keeps everything
    /// in memory.
    std::string output_dir;

    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
};

struct ExperimentResult {
    TrainingResult primary;
    std::optional<double> val_accuracy;
    std::size_t zeroed_neurons = 0;  // exactly-zero groups in penalized layers

    std::optional<TrainingResult> baseline;
    std::optional<double> baseline_val_accuracy;

    /// Sparsity accounting for paired runs: the trained network against its
    /// compacted form, accuracy gap against the baseline twin.
    std::optional<SparsityReport> report;
};

/// Load or synthesize the datasets, train (twice when a paired baseline is
/// requested), and drop artifacts into output_dir when one is set:
/// checkpoint.bin and log.jsonl, plus baseline_checkpoint.bin,
/// baseline_log.jsonl, report.json and report.txt for paired runs.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace slimnet
