#pragma once

#include <random>
#include <utility>
#include <vector>

#include "secord/domain.hpp"

namespace secord {

/// Two-component Gaussian mixture driven by a binary switch:
/// x ~ Bernoulli(gamma), y | x=j ~ Normal(nu_j, rho^2).
/// gamma may sit on {0,1} (degenerate single-component sampling); operations
/// whose math needs an interior mixing weight reject the endpoints.
struct GaussMixtureModel {
    double gamma = 0.5;
    double nu0 = 0.0;
    double nu1 = 1.0;
    double rho = 1.0;

    GaussMixtureModel() = default;
    GaussMixtureModel(double gamma, double nu0, double nu1, double rho);

    double marginal_density(double y) const;  // mixture density of y
    double mean() const { return (1.0 - gamma) * nu0 + gamma * nu1; }
    double variance() const;
};

/// Gaussian input with a tanh response:
/// y ~ Normal(nu, sigma^2), p(x=1 | y) = (1 + tanh(alpha*y + beta)) / 2.
struct GaussSigmoidModel {
    double nu = 0.0;
    double sigma = 1.0;
    double alpha = 1.0;
    double beta = 0.0;

    GaussSigmoidModel() = default;
    GaussSigmoidModel(double nu, double sigma, double alpha, double beta);

    double response_probability(double y) const;  // p(x=1 | y)
};

/// Binary conditional in tanh form:
/// p(x=1 | inputs) = (1 + tanh(lambda0 + sum_i lambda[i] * input_i)) / 2.
struct TanhBinaryKernel {
    double lambda0 = 0.0;
    std::vector<double> lambda;
};

/// (x, y) pairs from the mixture model.
std::vector<std::pair<double, double>> sample_gauss_mixture(const GaussMixtureModel& model,
                                                            long n, std::mt19937_64& rng);

/// (x, y) pairs from the sigmoid model.
std::vector<std::pair<double, double>> sample_gauss_sigmoid(const GaussSigmoidModel& model,
                                                            long n, std::mt19937_64& rng);

/// The input probability of a hard-threshold response at `beta_threshold`
/// that reproduces a Normal(nu, sigma^2) observable: the Gaussian CDF at
/// (beta_threshold - nu) / sigma.  Absolute error below 1e-10.
double unique_gamma(double nu, double sigma, double beta_threshold);

/// Response parameters (alpha, beta) of the anti-causal conditional
/// p(x=1 | y) = 1 / (beta * e^(alpha*y) + 1) implied by a mixture model:
/// alpha = (nu0 - nu1) / rho^2,
/// beta = ((1-gamma)/gamma) * exp((nu1^2 - nu0^2) / (2 rho^2)).
/// Throws for gamma in {0, 1} and for nu0 == nu1 combined degeneracies are
/// fine (alpha = 0); only the mixing weight must be interior.
std::pair<double, double> noncausal_sigmoid_params(const GaussMixtureModel& model);

double tanh_kernel_probability(const TanhBinaryKernel& kernel, const std::vector<int>& inputs);

/// OR-style gate of sharpness k on n_inputs bits: lambda0 = -k, every input
/// coefficient 2k.  As k grows the kernel approaches the exact OR.
TanhBinaryKernel or_gate_kernel(double k, int n_inputs);

/// A conditional probability table over binary conditioning assignments:
/// p(target=1 | bits) together with the probability of each assignment.
struct ConditionalTable {
    int input_count = 0;
    struct Entry {
        std::vector<int> bits;
        double probability = 0.0;  // p(target = 1 | bits)
        double weight = 0.0;       // p(bits)
    };
    std::vector<Entry> entries;
};

/// Exact joint distribution of (x_1..x_{n-1}, x_n) where the inputs are
/// independent fair bits and x_n follows the OR gate kernel.  States are
/// indexed by bit i of the state id = value of x_{i+1}.
class OrJointTable {
  public:
    OrJointTable(int n, double k);

    int variable_count() const { return n_; }
    double sharpness() const { return k_; }
    double joint_probability(const std::vector<int>& state) const;

    /// p(target=1 | fixed), marginalizing unmentioned variables.
    /// `fixed` holds (variable index, bit) pairs.  Throws when the
    /// conditioning event has probability zero.
    double conditional(int target, const std::vector<std::pair<int, int>>& fixed) const;

    /// p(x_n=1 | x_1..x_{n-1}) with uniform input weights: the causal table.
    ConditionalTable causal_table() const;
    /// p(x_1=1 | x_2..x_n): the anti-causal table.  Conditioning events of
    /// probability zero are excluded (they cannot occur).
    ConditionalTable reverse_table() const;

  private:
    int n_;
    double k_;
    std::vector<double> joint_;  // size 2^n
};

/// Exact OR-gate joint table for 3 <= n <= 12 variables.
OrJointTable or_joint_table(int n, double k);

struct DegreeFit {
    int degree = 0;            // smallest accepted degree, max_degree+1 when none fits
    bool fitted = false;       // true when some degree <= max_degree was accepted
    std::vector<double> rms_residuals;  // weighted RMS per candidate degree 0..max_degree
};

/// Smallest multilinear degree d such that a polynomial q of degree <= d in
/// the conditioning bits reproduces atanh(2p - 1) across the table, by
/// weighted least squares.  Entries whose probability saturates to 0/1 in
/// double precision enter as one-sided constraints at the +/-20 clamp (any
/// fit value beyond the clamp on the saturated side is residual-free); all
/// other entries contribute exact two-sided atanh targets.  A degree is
/// accepted when the weighted RMS residual is at most fit_tolerance.
DegreeFit minimal_tanh_degree(const ConditionalTable& table, int max_degree,
                              double fit_tolerance = 1e-3);

}  // namespace secord
