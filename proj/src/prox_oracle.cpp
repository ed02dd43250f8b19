// Numerical reference minimizer for the proximal subproblem. Deliberately
// free of any dependency on the library's own regularization code: plain
// scalar loops, golden-section line searches, and an explicit origin
// comparison. Used only to check the closed-form update.

#include "slimnet/prox_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace slimnet::oracle {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double l2(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

double l1(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += std::abs(x);
    return acc;
}

// Objective restricted to coordinate i: others fixed, rest2 holds the sum of
// squares of the other coordinates.
double coord_value(double u, double target_i, double rest2, double inv2t, double a, double b) {
    return inv2t * (u - target_i) * (u - target_i) + a * std::sqrt(u * u + rest2) + b * std::abs(u);
}

// Exact-enough minimization of the convex coordinate function over the
// bracket [lo, hi] by golden-section search.
double golden_min(double lo, double hi, double target_i, double rest2, double inv2t, double a, double b) {
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = coord_value(x1, target_i, rest2, inv2t, a, b);
    double f2 = coord_value(x2, target_i, rest2, inv2t, a, b);
    for (int iter = 0; iter < 160 && hi - lo > 1e-16 * (1.0 + std::abs(lo) + std::abs(hi)); ++iter) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            f1 = coord_value(x1, target_i, rest2, inv2t, a, b);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            f2 = coord_value(x2, target_i, rest2, inv2t, a, b);
        }
    }
    const double mid = 0.5 * (lo + hi);
    // The kink of |u| can beat the interior of a shrinking bracket.
    if (lo <= 0.0 && 0.0 <= hi &&
        coord_value(0.0, target_i, rest2, inv2t, a, b) < coord_value(mid, target_i, rest2, inv2t, a, b)) {
        return 0.0;
    }
    return mid;
}

std::vector<double> sweep_to_convergence(std::vector<double> theta, const std::vector<double>& target, double inv2t,
                                         double a, double b) {
    const std::size_t n = target.size();
    for (int sweep = 0; sweep < 4000; ++sweep) {
        double max_move = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double rest2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) rest2 += theta[j] * theta[j];
            }
            // The coordinate minimizer lies between 0 and target_i: the
            // quadratic pulls toward target_i, both penalties toward 0.
            const double lo = std::min(0.0, target[i]);
            const double hi = std::max(0.0, target[i]);
            const double u = lo == hi ? 0.0 : golden_min(lo, hi, target[i], rest2, inv2t, a, b);
            max_move = std::max(max_move, std::abs(u - theta[i]));
            theta[i] = u;
        }
        if (max_move < 1e-14) break;
    }
    return theta;
}

}  // namespace

double prox_objective(const std::vector<double>& theta, const std::vector<double>& target, double step, double lambda,
                      double alpha) {
    if (theta.size() != target.size()) throw std::invalid_argument("prox_objective: size mismatch");
    if (!(step > 0.0)) throw std::invalid_argument("prox_objective: step must be positive");
    const double a = (1.0 - alpha) * lambda * std::sqrt(static_cast<double>(target.size()));
    const double b = alpha * lambda;
    return sq_dist(theta, target) / (2.0 * step) + a * l2(theta) + b * l1(theta);
}

std::vector<double> prox_minimize(const std::vector<double>& target, double step, double lambda, double alpha) {
    if (target.empty()) throw std::invalid_argument("prox_minimize: empty target");
    if (!(step > 0.0)) throw std::invalid_argument("prox_minimize: step must be positive");
    if (!(lambda >= 0.0)) throw std::invalid_argument("prox_minimize: lambda must be non-negative");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("prox_minimize: alpha must lie in [0, 1]");

    const std::size_t n = target.size();
    const double a = (1.0 - alpha) * lambda * std::sqrt(static_cast<double>(n));
    const double b = alpha * lambda;
    const double inv2t = 1.0 / (2.0 * step);

    // Coordinate descent with exact line searches converges to the global
    // minimizer wherever the coupled l2 term is differentiable, i.e.
    // anywhere but the origin; the origin itself is checked explicitly.
    std::vector<double> from_target = sweep_to_convergence(target, target, inv2t, a, b);
    std::vector<double> half(target);
    for (double& v : half) v *= 0.5;
    std::vector<double> from_half = sweep_to_convergence(std::move(half), target, inv2t, a, b);

    const std::vector<double> origin(n, 0.0);
    const std::vector<double>* best = &origin;
    double best_val = prox_objective(origin, target, step, lambda, alpha);
    for (const std::vector<double>* cand : {&from_target, &from_half}) {
        const double val = prox_objective(*cand, target, step, lambda, alpha);
        if (val < best_val) {
            best_val = val;
            best = cand;
        }
    }
    return *best;
}

}  // namespace slimnet::oracle
