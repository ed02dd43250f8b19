#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slimnet/checkpoint.hpp"
#include "slimnet/data.hpp"
#include "slimnet/errors.hpp"
#include "slimnet/experiment.hpp"
#include "slimnet/network.hpp"
#include "slimnet/prox_oracle.hpp"
#include "slimnet/pruner.hpp"
#include "slimnet/regularization.hpp"
#include "slimnet/trainer.hpp"

namespace py = pybind11;

namespace {

using CArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

slimnet::Tensor tensor_from(const CArray& a) {
    std::vector<std::size_t> shape(a.ndim());
    for (py::ssize_t i = 0; i < a.ndim(); ++i) shape[static_cast<std::size_t>(i)] = static_cast<std::size_t>(a.shape(i));
    std::vector<double> data(a.data(), a.data() + a.size());
    return slimnet::Tensor(std::move(shape), std::move(data));
}

py::array_t<double> array_from(const slimnet::Tensor& t) {
    std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
    py::array_t<double> a(shape);
    std::copy(t.values().begin(), t.values().end(), a.mutable_data());
    return a;
}

// Rows of a 2-D array become rank-1 samples; a 4-D [n, 1, r, c] array
// becomes [1, r, c] samples.
slimnet::Dataset dataset_from(const CArray& inputs, const std::vector<std::size_t>& labels) {
    slimnet::Dataset data;
    if (inputs.ndim() == 2) {
        const std::size_t n = static_cast<std::size_t>(inputs.shape(0));
        const std::size_t d = static_cast<std::size_t>(inputs.shape(1));
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> row(inputs.data() + i * d, inputs.data() + (i + 1) * d);
            data.inputs.push_back(slimnet::Tensor({d}, std::move(row)));
        }
    } else if (inputs.ndim() == 4 && inputs.shape(1) == 1) {
        const std::size_t n = static_cast<std::size_t>(inputs.shape(0));
        const std::size_t r = static_cast<std::size_t>(inputs.shape(2));
        const std::size_t c = static_cast<std::size_t>(inputs.shape(3));
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> img(inputs.data() + i * r * c, inputs.data() + (i + 1) * r * c);
            data.inputs.push_back(slimnet::Tensor({1, r, c}, std::move(img)));
        }
    } else {
        throw slimnet::ShapeError("expected samples as [n, features] or [n, 1, rows, cols]");
    }
    data.labels = labels;
    data.validate();
    return data;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "group-sparse neural network training, pruning and reporting";

    py::register_exception<slimnet::ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<slimnet::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<slimnet::FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<slimnet::ContractError>(m, "ContractError", PyExc_RuntimeError);
    py::register_exception<slimnet::StructuralError>(m, "StructuralError", PyExc_RuntimeError);
    py::register_exception<slimnet::DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

    py::class_<slimnet::NetworkSpec>(m, "NetworkSpec")
        .def_static("from_json", &slimnet::NetworkSpec::from_json, py::arg("text"))
        .def("to_json", &slimnet::NetworkSpec::to_json)
        .def("validate_for_training", &slimnet::NetworkSpec::validate_for_training);

    py::class_<slimnet::Network>(m, "Network")
        .def_static("zeros", [](const slimnet::NetworkSpec& s) { return slimnet::Network::zeros(s); }, py::arg("spec"))
        .def_static(
            "random_init",
            [](const slimnet::NetworkSpec& s, std::uint64_t seed) { return slimnet::Network::random_init(s, seed); },
            py::arg("spec"), py::arg("seed"))
        .def("param_count", &slimnet::Network::param_count)
        .def("flat_params", [](const slimnet::Network& n) { return n.flat_params(); })
        .def("set_flat_params", &slimnet::Network::set_flat_params, py::arg("values"))
        .def("spec_json", [](const slimnet::Network& n) { return n.spec().to_json(); })
        .def(
            "predict", [](const slimnet::Network& n, const CArray& x) { return array_from(predict(n, tensor_from(x))); },
            py::arg("x"));

    m.def(
        "soft_threshold",
        [](const CArray& z, double tau) { return array_from(slimnet::soft_threshold(tensor_from(z), tau)); },
        py::arg("z"), py::arg("tau"));
    m.def("prox_group", &slimnet::prox_group, py::arg("theta"), py::arg("step"), py::arg("lambda_"), py::arg("alpha"));
    m.def(
        "regularizer_value",
        [](const slimnet::Network& net, double alpha, const std::vector<double>& per_layer_lambda) {
            slimnet::RegularizerConfig cfg;
            cfg.alpha = alpha;
            cfg.per_layer_lambda = per_layer_lambda;
            return slimnet::regularizer_value(net, cfg);
        },
        py::arg("net"), py::arg("alpha"), py::arg("per_layer_lambda"));

    m.def("save_checkpoint", &slimnet::save_checkpoint, py::arg("net"), py::arg("path"));
    m.def("load_checkpoint", &slimnet::load_checkpoint, py::arg("path"));

    m.def(
        "synth_teacher_student",
        [](std::size_t input_dim, std::size_t teacher_hidden, std::size_t classes, std::size_t count,
           std::uint64_t seed) {
            slimnet::SynthConfig cfg;
            cfg.input_dim = input_dim;
            cfg.teacher_hidden = teacher_hidden;
            cfg.classes = classes;
            cfg.count = count;
            cfg.seed = seed;
            const slimnet::SynthResult result = synth_teacher_student(cfg);
            py::array_t<double> inputs({count, input_dim});
            for (std::size_t i = 0; i < count; ++i) {
                std::copy(result.data.inputs[i].values().begin(), result.data.inputs[i].values().end(),
                          inputs.mutable_data() + i * input_dim);
            }
            return py::make_tuple(inputs, result.data.labels, result.teacher);
        },
        py::arg("input_dim"), py::arg("teacher_hidden"), py::arg("classes"), py::arg("count"), py::arg("seed"));

    m.def(
        "evaluate",
        [](const slimnet::Network& net, const CArray& inputs, const std::vector<std::size_t>& labels) {
            return slimnet::evaluate(net, dataset_from(inputs, labels));
        },
        py::arg("net"), py::arg("inputs"), py::arg("labels"));

    m.def(
        "detect_dead",
        [](const slimnet::Network& net, double eps) {
            const slimnet::DeadNeurons dead = slimnet::detect_dead(net, eps);
            return py::make_tuple(dead.per_layer, dead.total);
        },
        py::arg("net"), py::arg("eps") = 0.0);
    m.def(
        "compact",
        [](const slimnet::Network& net) {
            slimnet::CompactionResult comp = slimnet::compact(net);
            return py::make_tuple(std::move(comp.net), comp.kept);
        },
        py::arg("net"));
    m.def(
        "report_json",
        [](const slimnet::Network& before, const slimnet::Network& after, double acc_regularized, double acc_baseline) {
            return slimnet::report_json(slimnet::make_report(before, after, acc_regularized, acc_baseline));
        },
        py::arg("before"), py::arg("after"), py::arg("accuracy_regularized"), py::arg("accuracy_baseline"));

    m.def(
        "run_experiment_json",
        [](const std::string& text) {
            const slimnet::ExperimentResult r = slimnet::run_experiment(slimnet::ExperimentConfig::from_json(text));
            py::dict out;
            out["epochs"] = r.primary.history.size();
            out["zeroed_neurons"] = r.zeroed_neurons;
            out["val_accuracy"] = r.val_accuracy ? py::object(py::float_(*r.val_accuracy)) : py::none();
            out["baseline_val_accuracy"] =
                r.baseline_val_accuracy ? py::object(py::float_(*r.baseline_val_accuracy)) : py::none();
            out["report_json"] = r.report ? py::object(py::str(slimnet::report_json(*r.report))) : py::none();
            return out;
        },
        py::arg("config_json"));

    m.def(
        "run_prox_trials",
        [](std::size_t trials, std::uint64_t seed) {
            const slimnet::oracle::ProxTrialSummary s = slimnet::oracle::run_prox_trials(trials, seed);
            py::dict out;
            out["trials"] = s.trials;
            out["max_param_err"] = s.max_param_err;
            out["max_objective_gap"] = s.max_objective_gap;
            out["ok"] = s.pass(1e-6, 1e-8);
            return out;
        },
        py::arg("trials"), py::arg("seed"));
}
