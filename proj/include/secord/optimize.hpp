#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace secord {

struct BfgsOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-8;  // on the max-norm of the gradient
    double armijo_c = 1e-4;
    double backtrack_factor = 0.5;
    int max_backtracks = 60;
    bool record_history = false;
};

struct BfgsResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;  // objective after each accepted step
};

/// Objective callback: returns f(x) and fills `grad` (resized by the caller).
using BfgsObjective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;
/// Optional feasibility projection applied after each accepted step; returns
/// true when it moved the point (the inverse-Hessian model is then reset).
using BfgsProjection = std::function<bool(Eigen::VectorXd& x)>;

/// Dense BFGS with Armijo backtracking.  Deterministic; intended for smooth
/// convex objectives of modest dimension.  Non-convergence is reported via
/// the result flag, never an exception; non-finite objective values are.
inline BfgsResult minimize_bfgs(const BfgsObjective& objective, Eigen::VectorXd x0,
                                const BfgsOptions& options = {},
                                const BfgsProjection& project = nullptr) {
    const Eigen::Index n = x0.size();
    BfgsResult result;
    if (project) project(x0);
    result.x = x0;

    Eigen::VectorXd grad(n);
    double value = objective(result.x, grad);
    if (!std::isfinite(value))
        throw std::runtime_error("minimize_bfgs: objective is non-finite at the start point");
    if (options.record_history) result.history.push_back(value);

    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        if (grad.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
            result.converged = true;
            break;
        }
        Eigen::VectorXd direction = -(hinv * grad);
        double slope = grad.dot(direction);
        if (!(slope < 0.0)) {  // model went bad; fall back to steepest descent
            hinv.setIdentity();
            direction = -grad;
            slope = grad.dot(direction);
        }

        double step = 1.0;
        Eigen::VectorXd x_new(n), grad_new(n);
        double value_new = value;
        bool accepted = false;
        bool resolved_decrease = false;
        // Smallest objective decrease double precision can still attest to.
        const double resolution = 1e-15 * std::max(1.0, std::abs(value));
        for (int bt = 0; bt < options.max_backtracks; ++bt) {
            x_new = result.x + step * direction;
            value_new = objective(x_new, grad_new);
            if (std::isfinite(value_new)) {
                if (value_new <= value + options.armijo_c * step * slope &&
                    value - value_new > resolution) {
                    accepted = true;
                    resolved_decrease = true;
                    break;
                }
                // Once objective differences fall below floating-point
                // resolution the Armijo test is blind, but a step that
                // materially shrinks the gradient is still real progress
                // toward stationarity; accept it even if the value drifts
                // up within that same resolution (its curvature signal is
                // still noise, so the Hessian model is left untouched).
                if (value_new <= value + resolution &&
                    grad_new.lpNorm<Eigen::Infinity>() <
                        0.9 * grad.lpNorm<Eigen::Infinity>()) {
                    accepted = true;
                    break;
                }
            }
            step *= options.backtrack_factor;
        }
        if (!accepted) break;  // line search stalled; report non-convergence

        bool projected = false;
        if (project) {
            projected = project(x_new);
            if (projected) value_new = objective(x_new, grad_new);
        }

        const Eigen::VectorXd s = x_new - result.x;
        const Eigen::VectorXd y = grad_new - grad;
        result.x = x_new;
        value = value_new;
        grad = grad_new;
        result.iterations = iter + 1;
        if (options.record_history) result.history.push_back(value);

        if (projected) {
            hinv.setIdentity();  // curvature across the projection is unreliable
            continue;
        }
        if (!resolved_decrease) continue;  // (s, y) below noise; keep curvature as is
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
            const Eigen::VectorXd hy = hinv * y;
            const double yhy = y.dot(hy);
            hinv += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
                    (hy * s.transpose() + s * hy.transpose()) / sy;
        }
    }
    if (grad.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance)
        result.converged = true;
    result.value = value;
    return result;
}

}  // namespace secord
