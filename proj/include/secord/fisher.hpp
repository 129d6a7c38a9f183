#pragma once

#include <Eigen/Dense>

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "secord/closedform.hpp"
#include "secord/domain.hpp"

namespace secord {

/// A parametric density with respect to a grid's reference measure.
/// `grad_log` (the score) is optional; when absent, scores are taken by
/// central finite differences of log density with step `fd_step`.
struct DensityFamily {
    std::vector<std::string> parameter_labels;
    std::function<double(const Eigen::VectorXd& theta, const Eigen::VectorXd& x)> density;
    std::function<Eigen::VectorXd(const Eigen::VectorXd& theta, const Eigen::VectorXd& x)>
        grad_log;  // optional

    int parameter_count() const { return static_cast<int>(parameter_labels.size()); }
};

/// A parametric conditional density p(output | input).
struct ConditionalDensityFamily {
    std::vector<std::string> parameter_labels;
    std::function<double(const Eigen::VectorXd& eta, const Eigen::VectorXd& output,
                         const Eigen::VectorXd& input)>
        density;
    std::function<Eigen::VectorXd(const Eigen::VectorXd& eta, const Eigen::VectorXd& output,
                                  const Eigen::VectorXd& input)>
        grad_log;  // optional

    int parameter_count() const { return static_cast<int>(parameter_labels.size()); }
};

struct FisherMatrix {
    Eigen::MatrixXd matrix;  // symmetric positive semidefinite
    std::vector<std::string> parameter_labels;
    double smallest_eigenvalue = 0.0;

    /// Singular values above rel_tol times the largest count toward rank.
    int rank(double rel_tol = 1e-6) const;
};

/// Fisher information of a marginal family by grid quadrature:
/// integral (grad log p)(grad log p)' p dmu.  Throws std::runtime_error when
/// the density underflows on more than 1% of grid nodes (recommending a
/// narrower truncation window).
FisherMatrix fisher_marginal(const DensityFamily& family, const Eigen::VectorXd& theta,
                             const QuadratureGrid& grid, double fd_step = 1e-6);

/// Conditional Fisher information by double quadrature: the outer integral
/// runs over the input variable under `input_family(theta)`, the inner one
/// over the conditional's output variable.
FisherMatrix fisher_conditional(const ConditionalDensityFamily& conditional,
                                const Eigen::VectorXd& eta, const DensityFamily& input_family,
                                const Eigen::VectorXd& theta, const QuadratureGrid& input_grid,
                                const QuadratureGrid& output_grid, double fd_step = 1e-6);

// --- Stock families ---------------------------------------------------------

/// Bernoulli(theta) on {0,1}; analytic score.
DensityFamily bernoulli_family();
/// Normal(nu, sigma^2) with theta = (nu, sigma); analytic score.
DensityFamily gaussian_family();
/// Two-component equal-width Gaussian mixture with theta =
/// (gamma, nu0, nu1, rho); analytic score.
DensityFamily mixture_marginal_family();
/// Binary response p(x=1 | y) = 1 / (beta e^(alpha y) + 1) with
/// eta = (alpha, beta), beta > 0; analytic score.
ConditionalDensityFamily logistic_conditional_family();
/// Gaussian observable with a sigmoid gate, eta = (sigma, nu, alpha, beta):
/// p(y | x=1) proportional to N(y; nu, sigma^2) / (1 + e^(2 alpha y + 2 beta)),
/// p(y | x=0) to the complement, each normalized on `grid`.  Score by
/// finite differences.
ConditionalDensityFamily sigmoid_response_conditional_family(const QuadratureGrid& grid);

/// p(x=1) of the sigmoid-response joint with parameters eta =
/// (sigma, nu, alpha, beta), by quadrature on `grid`.
double marginal_response_probability(const Eigen::Vector4d& eta, const QuadratureGrid& grid);

/// Map a tanh-form response model (p(x=1|y) = (1+tanh(alpha y + beta))/2)
/// onto the (sigma, nu, alpha, beta) convention used by the conditional
/// family above (which flips the response orientation).
Eigen::Vector4d response_family_params(const GaussSigmoidModel& model);

// --- Difference / derivative matrices underlying the rank conditions -------

/// 4x4 matrix with rows indexed by the partial derivatives of
/// log[N(y; nu, sigma^2) / (1 + e^(2 alpha y + 2 beta))] with respect to
/// (sigma, nu, alpha, beta), and columns h_j(points[i]) - h_j(base_point).
/// Terms constant in y (the response-marginal derivatives) cancel in the
/// differences and are omitted.
Eigen::Matrix4d appendix_matrix_pyx(const Eigen::Vector4d& eta, double base_point,
                                    const Eigen::Vector4d& points);

/// 4x4 matrix of mixture-density partial derivatives: rows are
/// d p_theta(y) / d(gamma, nu0, nu1, rho), columns the four evaluation
/// points.  Throws for rho <= 0.
Eigen::Matrix4d appendix_matrix_py(const Eigen::Vector4d& theta, const Eigen::Vector4d& points);

/// 2x2 matrix of response-probability partial derivatives: rows are
/// d p(x=1|y) / d(alpha, beta), columns the two evaluation points.
Eigen::Matrix2d appendix_matrix_pxy(const Eigen::Vector2d& eta, const Eigen::Vector2d& points);

/// Smallest singular value after scaling every nonzero row to unit norm.
double smallest_singular_value_row_normalized(const Eigen::MatrixXd& m);

/// Number of singular values above rel_tol times the largest.
int numeric_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-6);

// --- Estimators used by the split-sample experiment ------------------------

struct MixtureFit {
    GaussMixtureModel model;
    int iterations = 0;
    bool converged = false;
    double loglik_per_sample = 0.0;
};

/// Maximum-likelihood fit of the equal-width two-component mixture by EM
/// with a deterministic split-at-the-median start; components are returned
/// with nu0 <= nu1.
MixtureFit fit_gauss_mixture_mle(const std::vector<double>& y, int max_iterations = 500,
                                 double tolerance = 1e-10);

struct LogisticFit {
    double alpha = 0.0;
    double beta = 1.0;
    bool converged = false;
};

/// Conditional maximum likelihood for p(x=1|y) = 1 / (beta e^(alpha y) + 1)
/// on (x, y) pairs, by Newton iteration on the equivalent logistic
/// regression.  Separated data is flagged, not thrown.
LogisticFit fit_inverse_logistic_mle(const std::vector<std::pair<double, double>>& xy);

struct SigmoidConditionalFit {
    Eigen::Vector4d eta;  // (sigma, nu, alpha, beta)
    bool converged = false;
};

/// Conditional maximum likelihood of the sigmoid-response family
/// p_eta(y | x) on (x, y) pairs; the response-marginal normalizers are
/// evaluated on `grid`.
SigmoidConditionalFit fit_sigmoid_conditional_mle(const std::vector<std::pair<double, double>>& xy,
                                                  const QuadratureGrid& grid);

// --- Split-sample dependence experiment -------------------------------------

enum class SplitDirection { MixtureForward, SigmoidForward };

struct SplitSampleOptions {
    std::vector<long> sample_sizes;
    std::vector<unsigned> seeds;
    /// Replace the fixed conditional used for sample 2 by a freshly drawn
    /// one per cell; residuals then stop shrinking with k.
    bool independence_control = false;
};

struct DependenceCell {
    long sample_size = 0;
    unsigned seed = 0;
    double residual = 0.0;
    double proxy_bits = 0.0;
    bool converged = false;
};

struct DependenceReport {
    std::vector<long> sample_sizes;
    std::vector<double> median_residuals;   // per sample size
    std::vector<double> median_proxy_bits;  // per sample size
    double fitted_slope = 0.0;              // median proxy bits vs log2(sample size)
    bool independence_control = false;
    std::vector<DependenceCell> cells;
};

/// Two-sample consistency probe of the parameter coupling between a cause
/// marginal and the anti-causal conditional it induces.  Per (sample size,
/// seed) cell: the input-marginal parameters are estimated from one sample,
/// the anti-causal conditional parameters from an independent sample drawn
/// under a modified input marginal, and the residual is the distance
/// between the mapped estimates.  Residuals shrink like 1/sqrt(k) exactly
/// because both sides estimate facets of one mechanism; under the
/// independence control they level off.
DependenceReport split_sample_experiment(SplitDirection direction,
                                         const GaussMixtureModel& mixture_truth,
                                         double modified_input_param,
                                         const SplitSampleOptions& options);
DependenceReport split_sample_experiment(SplitDirection direction,
                                         const GaussSigmoidModel& sigmoid_truth,
                                         double modified_input_param,
                                         const SplitSampleOptions& options);

std::string dependence_report_to_json(const DependenceReport& report, int indent = -1);
std::string dependence_report_to_csv(const DependenceReport& report);

}  // namespace secord
