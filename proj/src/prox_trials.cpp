#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "slimnet/prox_oracle.hpp"
#include "slimnet/regularization.hpp"

namespace slimnet::oracle {

namespace {

std::string describe(const std::vector<double>& target, double step, double lambda, double alpha) {
    std::ostringstream os;
    os.precision(17);
    os << "P=" << target.size() << " t=" << step << " lambda=" << lambda << " alpha=" << alpha << " target=[";
    for (std::size_t i = 0; i < target.size(); ++i) os << (i ? ", " : "") << target[i];
    os << "]";
    return os.str();
}

}  // namespace

ProxTrialSummary run_prox_trials(std::size_t trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_p(1, 8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double alphas[] = {0.0, 0.25, 0.5, 1.0};

    ProxTrialSummary summary;
    summary.trials = trials;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const std::size_t p = pick_p(rng);
        const double alpha = alphas[trial % 4];
        const double step = std::pow(10.0, -2.0 * unit(rng));        // [1e-2, 1]
        double lambda = std::pow(10.0, 3.0 * unit(rng) - 2.0);       // [1e-2, 10]
        if (trial % 17 == 0) lambda = 0.0;

        std::vector<double> target(p);
        const double scale = std::pow(10.0, 2.0 * unit(rng) - 1.0);  // [0.1, 10]
        for (double& v : target) v = gauss(rng) * scale;
        if (trial % 11 == 0) {
            // Graze the kill boundary: scale the target so the thresholded
            // vector's norm sits within a few percent of the kill radius.
            const double kill = step * (1.0 - alpha) * lambda * std::sqrt(static_cast<double>(p));
            double norm = 0.0;
            for (double v : target) norm += v * v;
            norm = std::sqrt(norm);
            if (kill > 0.0 && norm > 0.0) {
                const double wobble = 0.95 + 0.1 * unit(rng);
                for (double& v : target) v *= kill / norm * wobble;
            }
        }

        const std::vector<double> closed = prox_group(target, step, lambda, alpha);
        const std::vector<double> reference = prox_minimize(target, step, lambda, alpha);

        double param_err = 0.0;
        for (std::size_t i = 0; i < p; ++i) param_err = std::max(param_err, std::abs(closed[i] - reference[i]));
        const double obj_gap = std::abs(prox_objective(closed, target, step, lambda, alpha) -
                                        prox_objective(reference, target, step, lambda, alpha));

        if (param_err > summary.max_param_err || obj_gap > summary.max_objective_gap) {
            summary.worst_trial = trial;
            summary.worst_detail = describe(target, step, lambda, alpha);
        }
        summary.max_param_err = std::max(summary.max_param_err, param_err);
        summary.max_objective_gap = std::max(summary.max_objective_gap, obj_gap);
    }
    return summary;
}

}  // namespace slimnet::oracle
