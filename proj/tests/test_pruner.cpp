#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "slimnet/network.hpp"
#include "slimnet/pruner.hpp"
#include "support/netgen.hpp"

using slimnet::Network;
using slimnet::NetworkSpec;
using slimnet::Tensor;

namespace {

void kill_group(Network& net, std::size_t layer, std::size_t n) {
    auto& g = net.params()[layer][n];
    g.weights = Tensor(g.weights.shape());
    g.bias = 0.0;
}

// The worked reference case: [4] -> dense 10 -> relu -> classifier 2 with
// half the hidden neurons dead and every surviving entry nonzero.
Network half_dead_net() {
    Network net = Network::random_init(testnets::dense_stack(4, 10, 2, slimnet::LossKind::cross_entropy), 61);
    for (auto& g : net.params()[0]) g.bias = 0.5;
    for (auto& g : net.params()[2]) g.bias = -0.25;
    for (const std::size_t n : {1, 3, 5, 7, 9}) kill_group(net, 0, n);
    return net;
}

Tensor random_input(const std::vector<std::size_t>& shape, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Tensor t(shape);
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = gauss(rng);
    return t;
}

double max_prediction_gap(const Network& a, const Network& b, std::uint64_t seed, int reps = 20) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int i = 0; i < reps; ++i) {
        const Tensor x = random_input(a.input_shape(), rng);
        const Tensor pa = slimnet::predict(a, x);
        const Tensor pb = slimnet::predict(b, x);
        REQUIRE(pa.shape() == pb.shape());
        for (std::size_t j = 0; j < pa.numel(); ++j) {
            worst = std::max(worst, std::abs(pa[j] - pb[j]));
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("a randomly initialized network has no dead neurons") {
    const Network net = Network::random_init(testnets::dense_double(5, 8, 3, slimnet::LossKind::cross_entropy), 62);
    const auto dead = slimnet::detect_dead(net);
    CHECK(dead.total == 0);
    for (const auto& layer : dead.per_layer) CHECK(layer.empty());
}

TEST_CASE("dead detection returns the exact zeroed indices") {
    Network net = Network::random_init(testnets::dense_double(5, 8, 3, slimnet::LossKind::cross_entropy), 63);
    kill_group(net, 0, 1);
    kill_group(net, 0, 5);
    kill_group(net, 2, 7);
    const auto dead = slimnet::detect_dead(net);
    CHECK(dead.per_layer[0] == std::vector<std::size_t>{1, 5});
    CHECK(dead.per_layer[2] == std::vector<std::size_t>{7});
    CHECK(dead.total == 3);
}

TEST_CASE("dead detection ignores the classifier layer") {
    Network net = Network::random_init(testnets::dense_stack(4, 6, 3, slimnet::LossKind::cross_entropy), 64);
    kill_group(net, 2, 0);  // classifier group
    CHECK(slimnet::detect_dead(net).total == 0);
}

TEST_CASE("dead detection honors a magnitude tolerance") {
    Network net = Network::random_init(testnets::dense_stack(4, 6, 3, slimnet::LossKind::cross_entropy), 65);
    auto& g = net.params()[0][2];
    for (std::size_t i = 0; i < g.weights.numel(); ++i) g.weights[i] = 1e-9;
    g.bias = -1e-9;
    CHECK(slimnet::detect_dead(net).total == 0);
    const auto dead = slimnet::detect_dead(net, 1e-8);
    CHECK(dead.total == 1);
    CHECK(dead.per_layer[0] == std::vector<std::size_t>{2});
    CHECK_THROWS_AS(slimnet::detect_dead(net, -1.0), std::domain_error);
}

TEST_CASE("compacting a fully live network copies it bit for bit") {
    const Network net = Network::random_init(testnets::dense_double(5, 8, 3, slimnet::LossKind::cross_entropy), 66);
    const auto comp = slimnet::compact(net);
    CHECK(comp.net.flat_params() == net.flat_params());
    CHECK(comp.kept[0].size() == 8);
    CHECK(comp.kept[2].size() == 8);
    CHECK(comp.kept[4].size() == 3);
    CHECK(comp.kept[1].empty());  // relu carries no parameters
}

TEST_CASE("compaction refuses to sever a layer whose neurons are all dead") {
    Network net = Network::random_init(testnets::dense_stack(4, 3, 2, slimnet::LossKind::cross_entropy), 67);
    for (std::size_t n = 0; n < 3; ++n) kill_group(net, 0, n);
    CHECK_THROWS_WITH_AS(slimnet::compact(net), doctest::Contains("layer 0"), slimnet::StructuralError);
}

TEST_CASE("compaction drops dead neurons and the downstream weights that read them") {
    const Network net = half_dead_net();
    const auto comp = slimnet::compact(net);
    CHECK(comp.kept[0] == std::vector<std::size_t>{0, 2, 4, 6, 8});
    CHECK(comp.net.spec().layers[0].neurons == 5);
    CHECK(comp.net.param_count() == 37);  // 5*(4+1) hidden + 2*(5+1) classifier

    // surviving hidden groups keep their bits
    for (std::size_t j = 0; j < 5; ++j) {
        CHECK(comp.net.params()[0][j].flatten() == net.params()[0][comp.kept[0][j]].flatten());
    }
    // classifier weights are gathered at the surviving positions
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(comp.net.params()[2][c].weights[j] == net.params()[2][c].weights[comp.kept[0][j]]);
        }
        CHECK(comp.net.params()[2][c].bias == net.params()[2][c].bias);
    }
    CHECK(max_prediction_gap(net, comp.net, 100) <= 1e-10);
}

TEST_CASE("compaction is idempotent") {
    const Network net = half_dead_net();
    const auto once = slimnet::compact(net);
    const auto twice = slimnet::compact(once.net);
    CHECK(twice.net.flat_params() == once.net.flat_params());
    CHECK(twice.kept[0] == std::vector<std::size_t>{0, 1, 2, 3, 4});
}

TEST_CASE("compacted convolution chains predict identically") {
    Network net = Network::random_init(testnets::conv_chain(4, 3), 68);
    kill_group(net, 0, 1);  // a vertical filter
    kill_group(net, 2, 2);  // a horizontal filter
    const auto comp = slimnet::compact(net);
    CHECK(comp.net.spec().layers[0].neurons == 3);
    CHECK(comp.net.spec().layers[2].neurons == 2);
    CHECK(max_prediction_gap(net, comp.net, 101) <= 1e-10);
}

TEST_CASE("compaction flows channel removals through pooling into a flattening classifier") {
    Network net = Network::random_init(testnets::pooled_conv(), 69);
    kill_group(net, 0, 0);
    const auto comp = slimnet::compact(net);
    CHECK(max_prediction_gap(net, comp.net, 102) <= 1e-10);
}

TEST_CASE("compaction preserves decomposed two-stage outputs") {
    Network net = Network::random_init(testnets::decomposed_net(), 70);
    kill_group(net, 0, 1);  // shared vertical filter
    kill_group(net, 2, 0);  // horizontal stage neuron
    const auto comp = slimnet::compact(net);
    CHECK(max_prediction_gap(net, comp.net, 103) <= 1e-10);
}

TEST_CASE("removed parameters split into dead groups plus induced downstream slots") {
    const Network net = half_dead_net();
    const auto comp = slimnet::compact(net);
    const std::size_t removed = net.param_count() - comp.net.param_count();
    // 5 dead groups of size 5, plus 5 induced weight slots in each of the 2
    // classifier neurons.
    CHECK(removed == 5 * 5 + 2 * 5);
}

TEST_CASE("the sparsity report reproduces the worked reference case") {
    const Network net = half_dead_net();
    const auto comp = slimnet::compact(net);
    const auto report = slimnet::make_report(net, comp.net, 0.95, 0.90);

    CHECK(report.neurons_pct == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(report.group_param_pct == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(report.total_param_pct == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(report.total_induced_pct == doctest::Approx(100.0 * 35.0 / 72.0).epsilon(1e-12));
    CHECK(report.per_layer_neuron_counts ==
          std::vector<std::pair<std::size_t, std::size_t>>{{10, 5}});
    CHECK(report.accuracy_gap == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(report.flops_before == 120);
    CHECK(report.flops_after == 60);
    CHECK(report.feature_memory_before == 12);
    CHECK(report.feature_memory_after == 7);
    CHECK(report.param_memory_before == 72);
    CHECK(report.param_memory_after == 37);
}

TEST_CASE("stray zeros count toward total and induced percentages but not group ones") {
    Network net = half_dead_net();
    // zero two individual weights inside live groups
    net.params()[0][0].weights[1] = 0.0;
    net.params()[0][2].weights[3] = 0.0;
    const auto comp = slimnet::compact(net);
    const auto report = slimnet::make_report(net, comp.net, 0.9, 0.9);
    CHECK(report.neurons_pct == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(report.group_param_pct == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(report.total_param_pct == doctest::Approx(100.0 * 27.0 / 50.0).epsilon(1e-12));
    CHECK(report.total_induced_pct == doctest::Approx(100.0 * 37.0 / 72.0).epsilon(1e-12));
    CHECK(report.accuracy_gap == 0.0);
}

TEST_CASE("group percentage never exceeds the total-zero percentage") {
    std::mt19937_64 rng(71);
    for (int rep = 0; rep < 20; ++rep) {
        Network net = Network::random_init(testnets::dense_double(5, 8, 3, slimnet::LossKind::cross_entropy),
                                           200 + static_cast<std::uint64_t>(rep));
        std::uniform_int_distribution<std::size_t> pick(0, 7);
        kill_group(net, 0, pick(rng));
        kill_group(net, 2, pick(rng));
        if (rep % 2 == 0) net.params()[0][(pick(rng))].weights[0] = 0.0;
        const auto comp = slimnet::compact(net);
        const auto report = slimnet::make_report(net, comp.net, 0.5, 0.5);
        CHECK(report.group_param_pct <= report.total_param_pct + 1e-9);
    }
}

TEST_CASE("the report content rejects a network that is not the compaction") {
    const Network net = half_dead_net();
    CHECK_THROWS_AS(slimnet::make_report(net, net, 0.9, 0.9), slimnet::ContractError);
    const Network other = Network::random_init(testnets::dense_stack(4, 7, 2, slimnet::LossKind::cross_entropy), 72);
    CHECK_THROWS_AS(slimnet::make_report(net, other, 0.9, 0.9), slimnet::ContractError);
}

TEST_CASE("report JSON carries the documented fields in order") {
    const Network net = half_dead_net();
    const auto comp = slimnet::compact(net);
    const auto report = slimnet::make_report(net, comp.net, 0.95, 0.90);
    const auto j = nlohmann::ordered_json::parse(slimnet::report_json(report));

    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"neurons_pct", "group_param_pct", "total_param_pct", "total_induced_pct",
                                           "per_layer_neuron_counts", "accuracy_gap", "flops_before", "flops_after",
                                           "feature_memory_before", "feature_memory_after", "param_memory_before",
                                           "param_memory_after"});
    CHECK(j["neurons_pct"] == 50.0);
    CHECK(j["per_layer_neuron_counts"] == nlohmann::ordered_json::parse("[[10,5]]"));
    CHECK(j["flops_before"] == 120);
    CHECK(j["param_memory_after"] == 37);
}

TEST_CASE("report text prints one row per metric") {
    const Network net = half_dead_net();
    const auto comp = slimnet::compact(net);
    const auto report = slimnet::make_report(net, comp.net, 0.95, 0.90);
    const std::string text = slimnet::report_text(report);
    CHECK(text.find("neurons") != std::string::npos);
    CHECK(text.find("50.00%") != std::string::npos);
    CHECK(text.find("48.61%") != std::string::npos);
    CHECK(text.find("5.00pp") != std::string::npos);
    CHECK(text.find("120 -> 60") != std::string::npos);
    CHECK(text.find("12 -> 7") != std::string::npos);
    CHECK(text.find("72 -> 37") != std::string::npos);
    CHECK(text.find("10 -> 5") != std::string::npos);
}

TEST_CASE("flop and feature-memory counts follow the layer shapes") {
    const Network net = Network::random_init(testnets::dense_stack(4, 10, 2, slimnet::LossKind::cross_entropy), 73);
    CHECK(slimnet::flop_count(net) == 2 * 10 * 4 + 2 * 2 * 10);
    CHECK(slimnet::feature_memory(net) == 10 + 2);

    const Network conv = Network::random_init(testnets::pooled_conv(), 74);
    // [1,6,6] -> conv 3 filters d3 pad1 -> [3,6,6] -> relu -> pool 2,2 ->
    // [3,3,3] -> classifier 2. Conv group size 1*3+1, classifier 27+1.
    CHECK(slimnet::flop_count(conv) == 2 * (3 * 6 * 6) * 3 + 2 * 2 * 27);
    CHECK(slimnet::feature_memory(conv) == 3 * 6 * 6 + 3 * 3 * 3 + 2);
}
