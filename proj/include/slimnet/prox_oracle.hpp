#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace slimnet::oracle {

/// Value of the proximal subproblem objective
///   (1/(2*step)) * ||theta - target||^2
///   + (1-alpha) * lambda * sqrt(P) * ||theta||_2
///   + alpha * lambda * ||theta||_1
/// with P = target.size(). Self-contained scalar arithmetic.
double prox_objective(const std::vector<double>& theta, const std::vector<double>& target, double step, double lambda,
                      double alpha);

/// Numerical minimizer of the subproblem above, independent of any
/// closed-form solution: exact per-coordinate line search (golden section)
/// swept to convergence from two starts, then compared against the origin.
/// The objective is strongly convex, so the minimizer is unique.
std::vector<double> prox_minimize(const std::vector<double>& target, double step, double lambda, double alpha);

/// One randomized comparison batch between the closed-form group prox and
/// the numerical minimizer.
struct ProxTrialSummary {
    std::size_t trials = 0;
    double max_param_err = 0.0;      // worst |closed - oracle| entry
    double max_objective_gap = 0.0;  // worst |F(closed) - F(oracle)|
    std::size_t worst_trial = 0;
    std::string worst_detail;

    bool pass(double param_tol, double obj_tol) const {
        return max_param_err <= param_tol && max_objective_gap <= obj_tol;
    }
};

/// Run `trials` randomized instances (group sizes 1..8, alpha in
/// {0, 0.25, 0.5, 1}, mixed magnitudes, boundary-grazing cases included)
/// comparing prox_group against prox_minimize.
ProxTrialSummary run_prox_trials(std::size_t trials, std::uint64_t seed);

}  // namespace slimnet::oracle
