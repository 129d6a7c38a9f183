#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "secord/domain.hpp"
#include "secord/model.hpp"
#include "secord/optimize.hpp"

namespace secord {

/// Controls for maximum-likelihood kernel fitting.
struct FitOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-8;
    double armijo_c = 1e-4;           // line-search sufficient-decrease constant
    double backtrack_factor = 0.5;    // line-search step shrink factor
    /// Largest allowed eigenvalue of beta_self for unbounded-real children
    /// (keeps the exponent normalizable off the grid); enforced by spectral
    /// projection after every accepted step.
    double beta_eigen_cap = -1e-6;
    bool record_objective_history = false;
};

/// Grid recipe shared by every variable of a prepared table.
struct GridOptions {
    int resolution = kDefaultGridResolution;
    double truncation_sigmas = kDefaultTruncationSigmas;
};

/// A dataset prepared for fitting: one grid per variable, every value
/// snapped to its nearest grid node, and the node index remembered per row.
/// Kernels fitted from the same context have directly comparable scores.
struct FitContext {
    std::vector<std::string> names;
    std::vector<ValueDomain> domains;
    std::vector<QuadratureGrid> grids;
    std::vector<TruncationSpec> truncations;
    std::vector<Eigen::MatrixXd> values;        // per variable, dim x rows (snapped)
    std::vector<std::vector<int>> node_index;   // per variable, per row
    GridOptions grid_options;
    long row_count = 0;

    int variable_count() const { return static_cast<int>(domains.size()); }
};

/// Build a context from raw per-variable value matrices (dim x rows).
/// Unbounded domains get a data-driven truncation window (mean +/-
/// truncation_sigmas standard deviations).  Throws on shape mismatches and
/// on empty data.
FitContext make_fit_context(std::vector<Eigen::MatrixXd> columns,
                            std::vector<ValueDomain> domains,
                            std::vector<std::string> names = {},
                            const GridOptions& grid = {});

/// Convenience for scalar columns: domains are inferred with the given
/// hints, then columns are canonicalized.
FitContext make_fit_context(const std::vector<std::vector<double>>& columns,
                            std::vector<std::string> names = {},
                            const GridOptions& grid = {},
                            const DomainHints& hints = {});

struct FitResult {
    SecondOrderConditional kernel;
    double nll_per_sample = 0.0;  // natural-log conditional NLL, averaged over rows
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_history;  // populated on request
};

/// Maximum-likelihood fit of one conditional kernel (child given parents)
/// by quasi-Newton descent from zero parameters.  The objective is the
/// grid-discretized conditional negative log-likelihood, whose gradient is
/// model moments minus empirical moments; non-convergence within
/// max_iterations is flagged on the result, not thrown.  Throws on empty
/// data or bad variable indices.
FitResult fit_conditional(const FitContext& data, int child, const std::vector<int>& parents,
                          const FitOptions& options = {});

struct FittedOrderingModel {
    std::vector<int> ordering;
    std::vector<FitResult> steps;   // one per position in the ordering
    double total_nll = 0.0;         // sum of per-sample kernel scores

    bool all_converged() const;
    JointModel model() const;
};

/// Fit the complete chain of kernels for one variable ordering: position j
/// is conditioned on every variable earlier in the ordering.  The total
/// score is the sum of the per-sample kernel scores.
FittedOrderingModel fit_ordering(const FitContext& data, const std::vector<int>& ordering,
                                 const FitOptions& options = {});

}  // namespace secord
