#pragma once

#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

#include "secord/domain.hpp"

namespace secord {

/// One conditional kernel of a joint model: the density of the child
/// variable given its parents has the log-linear form
///
///   log p(x | parents) = alpha . x + x' * beta_self * x
///                        + sum_i x' * beta_parents[i] * parent_i
///                        - log_partition(parents)
///
/// relative to the child domain's reference measure.  The normalizer is
/// evaluated on the kernel's quadrature grid.  beta_self is stored
/// symmetrized (only its symmetric part enters the quadratic form).
struct SecondOrderConditional {
    int child_index = 0;
    std::vector<int> parent_indices;            // original variable ids
    Eigen::VectorXd alpha;                      // child dimension
    Eigen::MatrixXd beta_self;                  // child dim x child dim, symmetric
    std::vector<Eigen::MatrixXd> beta_parents;  // child dim x parent dim, one per parent
    ValueDomain child_domain;
    QuadratureGrid grid;
    // Grid recipe, kept so serialization can rebuild the grid exactly.
    int grid_resolution = kDefaultGridResolution;
    TruncationSpec grid_truncation;
};

/// Validate dimensions, symmetrize beta_self, and build the child grid.
SecondOrderConditional make_kernel(int child_index, std::vector<int> parent_indices,
                                   Eigen::VectorXd alpha, Eigen::MatrixXd beta_self,
                                   std::vector<Eigen::MatrixXd> beta_parents,
                                   const ValueDomain& child_domain,
                                   int resolution = kDefaultGridResolution,
                                   const TruncationSpec& truncation = {});

/// The bilinear exponent alpha.x + x'Bx + sum_i x'C_i p_i for one child
/// value and one parent assignment.  Throws on dimension mismatches.
double exponent(const SecondOrderConditional& kernel, const Eigen::VectorXd& x_child,
                const std::vector<Eigen::VectorXd>& parent_values);

/// log of the grid integral of exp(exponent) for a fixed parent assignment,
/// evaluated with a max-shift.  Throws std::runtime_error (naming the
/// kernel's child) if the exponent is non-finite anywhere on the grid.
double log_partition(const SecondOrderConditional& kernel,
                     const std::vector<Eigen::VectorXd>& parent_values);

/// exponent - log_partition: the log density of a child value with respect
/// to the child domain's reference measure.
double log_density(const SecondOrderConditional& kernel, const Eigen::VectorXd& x_child,
                   const std::vector<Eigen::VectorXd>& parent_values);

struct KernelMoments {
    Eigen::VectorXd mean;               // E[X]
    Eigen::MatrixXd second;             // E[X X']
    std::vector<Eigen::MatrixXd> cross; // E[X] parent_i' per parent
};

/// First and second conditional moments under the grid-discretized kernel.
KernelMoments moments(const SecondOrderConditional& kernel,
                      const std::vector<Eigen::VectorXd>& parent_values);

/// Draw a child value from the grid-discretized conditional (a categorical
/// over grid nodes with probabilities weight * density).
Eigen::VectorXd sample(const SecondOrderConditional& kernel,
                       const std::vector<Eigen::VectorXd>& parent_values,
                       std::mt19937_64& rng);

/// A fully specified joint model: variables in `ordering` get one kernel
/// each, conditioned on every variable earlier in the ordering.
struct JointModel {
    std::vector<int> ordering;                   // variable ids, cause-first
    std::vector<SecondOrderConditional> kernels; // kernels[j] is for ordering[j]
};

/// Sum of kernel log densities for a full row of values (indexed by
/// original variable id).
double joint_log_density(const JointModel& model, const std::vector<Eigen::VectorXd>& row);

/// JSON serialization (schema documented in the README); round-trips are
/// exact because doubles are emitted shortest-round-trip and grids are
/// rebuilt from their recipe.
std::string kernel_to_json(const SecondOrderConditional& kernel, int indent = -1);
SecondOrderConditional kernel_from_json(const std::string& text);
std::string model_to_json(const JointModel& model, int indent = -1);
JointModel model_from_json(const std::string& text);

}  // namespace secord
