#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "slimnet/network.hpp"
#include "slimnet/prox_oracle.hpp"
#include "slimnet/regularization.hpp"
#include "support/netgen.hpp"
#include "support/oracles.hpp"

using slimnet::Network;
using slimnet::NetworkSpec;
using slimnet::RegularizerConfig;
using slimnet::Tensor;

namespace {

std::vector<double> random_group(std::size_t p, std::mt19937_64& rng, double sigma = 1.0) {
    std::normal_distribution<double> gauss(0.0, sigma);
    std::vector<double> v(p);
    for (double& x : v) x = gauss(rng);
    return v;
}

}  // namespace

TEST_CASE("soft threshold shrinks toward zero elementwise") {
    const std::vector<double> out = slimnet::soft_threshold(std::vector<double>{3.0, -0.5, -2.0}, 1.0);
    CHECK(out == std::vector<double>{2.0, 0.0, -1.0});
}

TEST_CASE("soft threshold with tau zero is the identity, bit for bit") {
    const std::vector<double> z{0.1, -1e-300, 7.25, -0.0};
    CHECK(slimnet::soft_threshold(z, 0.0) == z);
}

TEST_CASE("soft threshold rejects a negative tau") {
    CHECK_THROWS_AS(slimnet::soft_threshold(std::vector<double>{1.0}, -0.1), std::domain_error);
}

TEST_CASE("soft threshold matches the scalar definition exactly on random vectors") {
    std::mt19937_64 rng(21);
    const std::vector<double> z = random_group(32, rng, 1.5);
    const double tau = 0.7;
    const std::vector<double> got = slimnet::soft_threshold(z, tau);
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double mag = std::abs(z[i]) - tau;
        const double expect = mag > 0.0 ? (z[i] > 0.0 ? mag : -mag) : 0.0;
        CHECK(got[i] == expect);  // bit-equal
    }
}

TEST_CASE("penalty of an all-zero network is zero") {
    const Network net = Network::zeros(testnets::dense_stack(6, 8, 3, slimnet::LossKind::cross_entropy));
    RegularizerConfig cfg;
    cfg.per_layer_lambda = {2.0};
    CHECK(slimnet::regularizer_value(net, cfg) == 0.0);
}

TEST_CASE("penalty of a single known group matches direct substitution") {
    // One neuron with weights [3, 4] and zero bias: group size P = 3,
    // l2 norm 5. With lambda 2 and alpha 0 the penalty is 2 * sqrt(3) * 5.
    NetworkSpec spec;
    spec.input_shape = {2};
    spec.layers = {slimnet::LayerSpec::dense_layer(1), slimnet::LayerSpec::activation(),
                   slimnet::LayerSpec::classifier_layer(2)};
    Network net = Network::zeros(spec);
    net.params()[0][0].weights[0] = 3.0;
    net.params()[0][0].weights[1] = 4.0;

    RegularizerConfig cfg;
    cfg.alpha = 0.0;
    cfg.per_layer_lambda = {2.0};
    CHECK(slimnet::regularizer_value(net, cfg) == doctest::Approx(2.0 * std::sqrt(3.0) * 5.0).epsilon(1e-12));
}

TEST_CASE("penalty matches a scalar evaluation of the mixed form") {
    std::mt19937_64 rng(22);
    Network net = Network::random_init(testnets::dense_double(5, 8, 3, slimnet::LossKind::cross_entropy), 23);
    for (auto& layer : net.params()) {
        for (auto& g : layer) g.bias = random_group(1, rng)[0];
    }
    RegularizerConfig cfg;
    cfg.alpha = 0.5;
    cfg.per_layer_lambda = {0.7, 1.3};

    // Scalar re-evaluation: for each penalized layer l,
    // (1-a)*lambda_l*sqrt(P_l)*sum_n ||theta_n||_2 + a*lambda_l*||theta_l||_1
    double expect = 0.0;
    const auto reg = slimnet::regularized_layers(net.spec());
    for (std::size_t i = 0; i < reg.size(); ++i) {
        double group_term = 0.0, l1_term = 0.0;
        std::size_t p = 0;
        for (const auto& g : net.params()[reg[i]]) {
            std::vector<double> flat = g.flatten();
            p = flat.size();
            group_term += refcalc::l2(flat);
            l1_term += refcalc::l1(flat);
        }
        expect += (1.0 - cfg.alpha) * cfg.per_layer_lambda[i] * std::sqrt(static_cast<double>(p)) * group_term +
                  cfg.alpha * cfg.per_layer_lambda[i] * l1_term;
    }
    CHECK(slimnet::regularizer_value(net, cfg) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("penalty config validation names bad fields") {
    const NetworkSpec spec = testnets::dense_stack(6, 8, 3, slimnet::LossKind::cross_entropy);
    RegularizerConfig cfg;
    cfg.per_layer_lambda = {1.0, 1.0};  // spec has one penalized layer
    CHECK_THROWS_AS(cfg.validate(spec), slimnet::ConfigError);
    cfg.per_layer_lambda = {-1.0};
    CHECK_THROWS_AS(cfg.validate(spec), slimnet::ConfigError);
    cfg.per_layer_lambda = {1.0};
    cfg.alpha = 1.5;
    CHECK_THROWS_AS(cfg.validate(spec), slimnet::ConfigError);
}

TEST_CASE("prox of the zero group is zero") {
    const std::vector<double> out = slimnet::prox_group({0.0, 0.0, 0.0}, 0.5, 2.0, 0.25);
    CHECK(out == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("prox kills a group inside the clamp radius exactly") {
    // ||theta|| = 1 with t * lambda * sqrt(P) = 2: the scale clamps at zero.
    const double lambda = 2.0 / std::sqrt(2.0);  // t = 1, P = 2
    const std::vector<double> out = slimnet::prox_group({0.6, 0.8}, 1.0, lambda, 0.0);
    CHECK(out == std::vector<double>{0.0, 0.0});
}

TEST_CASE("prox shrinks a surviving group by the closed-form factor") {
    // alpha = 0, ||theta|| = 5, t * lambda * sqrt(P) = 2.5: factor 0.5.
    const double lambda = 2.5 / std::sqrt(2.0);
    const std::vector<double> out = slimnet::prox_group({3.0, 4.0}, 1.0, lambda, 0.0);
    CHECK(out[0] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("prox with lambda zero returns the input bit for bit") {
    const std::vector<double> theta{0.25, -1e-17, 3.5, -0.0};
    CHECK(slimnet::prox_group(theta, 0.01, 0.0, 0.5) == theta);
}

TEST_CASE("prox with alpha one reduces to plain soft thresholding") {
    std::mt19937_64 rng(24);
    for (int rep = 0; rep < 20; ++rep) {
        const std::vector<double> theta = random_group(rep % 8 + 1, rng);
        const double t = 0.3, lambda = 0.9;
        CHECK(slimnet::prox_group(theta, t, lambda, 1.0) == slimnet::soft_threshold(theta, t * lambda));
    }
}

TEST_CASE("prox rejects a non-positive step") {
    CHECK_THROWS_AS(slimnet::prox_group({1.0}, 0.0, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(slimnet::prox_group({1.0}, -1.0, 1.0, 0.0), std::domain_error);
}

TEST_CASE("prox never increases the subproblem objective against the input point") {
    // The prox output minimizes (1/2t)||theta - theta_hat||^2 + r(theta), and
    // theta_hat itself is feasible, so r(out) + (1/2t)||out - in||^2 <= r(in).
    std::mt19937_64 rng(25);
    std::uniform_real_distribution<double> pick_t(0.05, 1.0), pick_l(0.1, 3.0);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t p = rep % 8 + 1;
        const std::vector<double> theta = random_group(p, rng);
        const double t = pick_t(rng), lambda = pick_l(rng);
        const double alpha = (rep % 4) * 0.25;
        const std::vector<double> out = slimnet::prox_group(theta, t, lambda, alpha);

        const double sp = std::sqrt(static_cast<double>(p));
        const auto penalty = [&](const std::vector<double>& v) {
            return (1.0 - alpha) * lambda * sp * refcalc::l2(v) + alpha * lambda * refcalc::l1(v);
        };
        double dist2 = 0.0;
        for (std::size_t i = 0; i < p; ++i) dist2 += (out[i] - theta[i]) * (out[i] - theta[i]);
        CHECK(penalty(out) + dist2 / (2.0 * t) <= penalty(theta) + 1e-12);
    }
}

TEST_CASE("prox is non-expansive") {
    std::mt19937_64 rng(26);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t p = rep % 6 + 2;
        const std::vector<double> a = random_group(p, rng);
        const std::vector<double> b = random_group(p, rng);
        const double t = 0.4, lambda = 1.1, alpha = (rep % 4) * 0.25;
        const std::vector<double> pa = slimnet::prox_group(a, t, lambda, alpha);
        const std::vector<double> pb = slimnet::prox_group(b, t, lambda, alpha);
        double din = 0.0, dout = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            din += (a[i] - b[i]) * (a[i] - b[i]);
            dout += (pa[i] - pb[i]) * (pa[i] - pb[i]);
        }
        CHECK(dout <= din + 1e-12);
    }
}

TEST_CASE("whole-network prox equals per-group prox applied in isolation") {
    std::mt19937_64 rng(27);
    Network net = Network::random_init(testnets::dense_double(5, 8, 3, slimnet::LossKind::cross_entropy), 31);
    for (auto& layer : net.params()) {
        for (auto& g : layer) g.bias = random_group(1, rng)[0];
    }
    RegularizerConfig cfg;
    cfg.alpha = 0.25;
    cfg.per_layer_lambda = {0.8, 1.6};
    const double step = 0.2;

    Network expect = net;
    const auto reg = slimnet::regularized_layers(net.spec());
    for (std::size_t i = 0; i < reg.size(); ++i) {
        for (auto& g : expect.params()[reg[i]]) {
            g.unflatten(slimnet::prox_group(g.flatten(), step, cfg.per_layer_lambda[i], cfg.alpha));
        }
    }

    slimnet::prox_all(net, cfg, step);
    CHECK(net.flat_params() == expect.flat_params());  // bit-equal
}

TEST_CASE("whole-network prox leaves zero-strength layers untouched and lists kills") {
    Network net = Network::random_init(testnets::dense_double(5, 8, 3, slimnet::LossKind::cross_entropy), 32);
    const std::vector<double> before = net.flat_params();
    net.params()[2][3].weights = Tensor({8});  // zero out group 3 of layer 2 by hand
    net.params()[2][3].bias = 0.0;

    RegularizerConfig cfg;
    cfg.per_layer_lambda = {0.0, 0.5};
    const slimnet::ProxOutcome outcome = slimnet::prox_all(net, cfg, 0.1);

    // layer 0 had strength zero: identical bits
    for (std::size_t n = 0; n < net.params()[0].size(); ++n) {
        CHECK(net.params()[0][n].flatten() == std::vector<double>(before.begin() + static_cast<std::ptrdiff_t>(n * 6),
                                                                 before.begin() + static_cast<std::ptrdiff_t>((n + 1) * 6)));
    }
    CHECK(outcome.zeroed[0].empty());
    // the hand-zeroed group of layer 2 stays zero and is reported
    CHECK(net.params()[2][3].is_zero());
    CHECK(std::find(outcome.zeroed[2].begin(), outcome.zeroed[2].end(), 3) != outcome.zeroed[2].end());
    CHECK(outcome.zeroed_total == outcome.zeroed[2].size());
}

TEST_CASE("oracle objective evaluates the subproblem formula") {
    // theta = [1, -2], target = [3, 0], t = 0.5, lambda = 2, alpha = 0.5:
    // distance term: (1/(2*0.5)) * ((1-3)^2 + 4) = 8
    // group term: 0.5 * 2 * sqrt(2) * sqrt(5)
    // l1 term: 0.5 * 2 * 3
    const double got = slimnet::oracle::prox_objective({1.0, -2.0}, {3.0, 0.0}, 0.5, 2.0, 0.5);
    const double expect = 8.0 + std::sqrt(2.0) * std::sqrt(5.0) + 3.0;
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("oracle minimizer solves analytically known instances") {
    std::mt19937_64 rng(28);
    // lambda = 0: the minimizer is the target itself.
    const std::vector<double> target = random_group(5, rng);
    const std::vector<double> free = slimnet::oracle::prox_minimize(target, 0.3, 0.0, 0.0);
    for (std::size_t i = 0; i < target.size(); ++i) {
        CHECK(free[i] == doctest::Approx(target[i]).epsilon(1e-9));
    }

    // P = 1: both penalty branches collapse to t*lambda*|theta|, so the
    // solution is the scalar soft threshold, independent of alpha.
    for (const double alpha : {0.0, 0.5, 1.0}) {
        const std::vector<double> one = slimnet::oracle::prox_minimize({2.0}, 1.0, 0.75, alpha);
        CHECK(one[0] == doctest::Approx(1.25).epsilon(1e-8));
    }

    // alpha = 1: elementwise soft threshold of the target.
    const std::vector<double> l1 = slimnet::oracle::prox_minimize({3.0, -0.5, -2.0}, 1.0, 1.0, 1.0);
    CHECK(l1[0] == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(std::abs(l1[1]) <= 1e-9);
    CHECK(l1[2] == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("randomized closed-form versus oracle trials stay within tolerance") {
    const auto summary = slimnet::oracle::run_prox_trials(100, 777);
    CHECK(summary.trials == 100);
    CHECK(summary.max_param_err <= 1e-6);
    CHECK(summary.max_objective_gap <= 1e-8);
}
