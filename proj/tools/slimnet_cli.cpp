#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "slimnet/checkpoint.hpp"
#include "slimnet/detail/json_util.hpp"
#include "slimnet/errors.hpp"
#include "slimnet/experiment.hpp"
#include "slimnet/prox_oracle.hpp"
#include "slimnet/pruner.hpp"

namespace {

int cmd_train(const std::string& config_path) {
    const slimnet::ExperimentConfig cfg = slimnet::ExperimentConfig::from_file(config_path);
    const slimnet::ExperimentResult result = slimnet::run_experiment(cfg);

    std::cout << "trained " << result.primary.history.size() << " epochs, " << result.zeroed_neurons
              << " neurons zeroed\n";
    if (result.val_accuracy) std::cout << "validation accuracy " << *result.val_accuracy << "\n";
    if (result.baseline_val_accuracy) {
        std::cout << "baseline validation accuracy " << *result.baseline_val_accuracy << "\n";
    }
    if (result.report) std::cout << slimnet::report_text(*result.report);
    if (!cfg.output_dir.empty()) std::cout << "artifacts in " << cfg.output_dir << "\n";
    return 0;
}

int cmd_prune(const std::string& in_path, const std::string& out_path) {
    const slimnet::Network net = slimnet::load_checkpoint(in_path);
    const slimnet::CompactionResult comp = slimnet::compact(net);

    std::cout << "pruned " << (net.param_count() - comp.net.param_count()) << " of " << net.param_count()
              << " parameters (" << slimnet::detect_dead(net).total << " dead neurons)\n";
    for (std::size_t l : slimnet::parameterized_layers(net.spec())) {
        std::cout << "layer " << l << " (" << slimnet::to_string(net.spec().layers[l].kind) << "): "
                  << net.params()[l].size() << " -> " << comp.kept[l].size() << " neurons\n";
    }

    // The compacted network must agree with the original everywhere; probe
    // with seeded random inputs before declaring the checkpoint good.
    std::mt19937_64 rng(0x70B5u);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        slimnet::Tensor x(net.input_shape());
        for (double& v : x.values()) v = gauss(rng);
        const slimnet::Tensor a = slimnet::predict(net, x);
        const slimnet::Tensor b = slimnet::predict(comp.net, x);
        for (std::size_t k = 0; k < a.numel(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
    }
    const bool equivalent = worst <= 1e-10;
    std::cout << "equivalence check (100 random inputs): max deviation " << worst << " -> "
              << (equivalent ? "PASS" : "FAIL") << "\n";

    slimnet::save_checkpoint(comp.net, out_path);
    std::cout << "wrote " << out_path << "\n";
    return equivalent ? 0 : 1;
}

int cmd_report(const std::string& before_path, const std::string& after_path, const std::string& metrics_path,
               const std::string& out_dir) {
    const slimnet::Network before = slimnet::load_checkpoint(before_path);
    const slimnet::Network after = slimnet::load_checkpoint(after_path);

    std::ifstream metrics_in(metrics_path);
    if (!metrics_in) throw slimnet::ConfigError("cannot open metrics '" + metrics_path + "'");
    slimnet::detail::ordered_json metrics;
    try {
        metrics = slimnet::detail::ordered_json::parse(metrics_in);
    } catch (const nlohmann::json::parse_error& e) {
        throw slimnet::ConfigError(metrics_path + ": invalid JSON: " + e.what());
    }
    slimnet::detail::reject_unknown_keys(metrics, {"accuracy_regularized", "accuracy_baseline"}, "metrics");
    const double acc_regularized = slimnet::detail::get_double(metrics, "accuracy_regularized", "metrics");
    const double acc_baseline = slimnet::detail::get_double(metrics, "accuracy_baseline", "metrics");

    const slimnet::SparsityReport report = slimnet::make_report(before, after, acc_regularized, acc_baseline);

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    const std::string json = slimnet::report_json(report);
    const std::string text = slimnet::report_text(report);
    for (const auto& [name, body] :
         {std::pair<std::string, const std::string&>{"report.json", json}, {"report.txt", text}}) {
        std::ofstream out(dir / name, std::ios::trunc);
        if (!out) throw slimnet::ConfigError("cannot open '" + (dir / name).string() + "' for writing");
        out << body;
    }
    std::cout << text;
    return 0;
}

int cmd_prox_check(std::size_t trials, std::uint64_t seed) {
    const slimnet::oracle::ProxTrialSummary summary = slimnet::oracle::run_prox_trials(trials, seed);
    const bool ok = summary.pass(1e-6, 1e-8);
    std::cout << "prox check: " << summary.trials << " trials, max parameter error " << summary.max_param_err
              << ", max objective gap " << summary.max_objective_gap << "\n";
    if (!ok) {
        std::cout << "worst trial " << summary.worst_trial << ": " << summary.worst_detail << "\n";
        std::cout << "FAIL\n";
        return 1;
    }
    std::cout << "OK\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"group-sparse training, pruning and reporting"};
    app.require_subcommand(1);

    std::string config_path;
    CLI::App* train = app.add_subcommand("train", "run a training experiment from a JSON config");
    train->add_option("--config", config_path, "experiment config path")->required();

    std::string in_path, out_path;
    CLI::App* prune = app.add_subcommand("prune", "remove dead neurons from a checkpoint");
    prune->add_option("--in", in_path, "input checkpoint")->required();
    prune->add_option("--out", out_path, "output checkpoint")->required();

    std::string before_path, after_path, metrics_path, out_dir = ".";
    CLI::App* report = app.add_subcommand("report", "summarize a pruning run");
    report->add_option("--before", before_path, "checkpoint before pruning")->required();
    report->add_option("--after", after_path, "checkpoint after pruning")->required();
    report->add_option("--metrics", metrics_path, "JSON with accuracy_regularized/accuracy_baseline")->required();
    report->add_option("--out-dir", out_dir, "where report.json and report.txt land");

    std::size_t trials = 1000;
    std::uint64_t seed = 12345;
    CLI::App* prox = app.add_subcommand("prox-check", "compare the closed-form prox against a numerical minimizer");
    prox->add_option("--trials", trials, "randomized instances to run");
    prox->add_option("--seed", seed, "random seed");

    try {
        app.parse(argc, argv);
        if (train->parsed()) return cmd_train(config_path);
        if (prune->parsed()) return cmd_prune(in_path, out_path);
        if (report->parsed()) return cmd_report(before_path, after_path, metrics_path, out_dir);
        if (prox->parsed()) return cmd_prox_check(trials, seed);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const slimnet::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const slimnet::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
