#include "secord/closedform.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "secord/mathutil.hpp"

namespace secord {

GaussMixtureModel::GaussMixtureModel(double gamma, double nu0, double nu1, double rho)
    : gamma(gamma), nu0(nu0), nu1(nu1), rho(rho) {
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("GaussMixtureModel: gamma must lie in [0, 1]");
    if (!(rho > 0.0)) throw std::invalid_argument("GaussMixtureModel: rho must be positive");
    if (!std::isfinite(nu0) || !std::isfinite(nu1))
        throw std::invalid_argument("GaussMixtureModel: component means must be finite");
}

double GaussMixtureModel::marginal_density(double y) const {
    return (1.0 - gamma) * normal_pdf(y, nu0, rho) + gamma * normal_pdf(y, nu1, rho);
}

double GaussMixtureModel::variance() const {
    const double m = mean();
    return rho * rho + (1.0 - gamma) * (nu0 - m) * (nu0 - m) + gamma * (nu1 - m) * (nu1 - m);
}

GaussSigmoidModel::GaussSigmoidModel(double nu, double sigma, double alpha, double beta)
    : nu(nu), sigma(sigma), alpha(alpha), beta(beta) {
    if (!(sigma > 0.0)) throw std::invalid_argument("GaussSigmoidModel: sigma must be positive");
    if (!std::isfinite(nu) || !std::isfinite(alpha) || !std::isfinite(beta))
        throw std::invalid_argument("GaussSigmoidModel: parameters must be finite");
}

double GaussSigmoidModel::response_probability(double y) const {
    return 0.5 * (1.0 + std::tanh(alpha * y + beta));
}

std::vector<std::pair<double, double>> sample_gauss_mixture(const GaussMixtureModel& model,
                                                            long n, std::mt19937_64& rng) {
    if (n < 0) throw std::invalid_argument("sample_gauss_mixture: negative sample count");
    std::bernoulli_distribution coin(model.gamma);
    std::normal_distribution<double> noise(0.0, model.rho);
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const bool x = coin(rng);
        const double y = (x ? model.nu1 : model.nu0) + noise(rng);
        out.emplace_back(x ? 1.0 : 0.0, y);
    }
    return out;
}

std::vector<std::pair<double, double>> sample_gauss_sigmoid(const GaussSigmoidModel& model,
                                                            long n, std::mt19937_64& rng) {
    if (n < 0) throw std::invalid_argument("sample_gauss_sigmoid: negative sample count");
    std::normal_distribution<double> input(model.nu, model.sigma);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const double y = input(rng);
        const double x = unif(rng) < model.response_probability(y) ? 1.0 : 0.0;
        out.emplace_back(x, y);
    }
    return out;
}

double unique_gamma(double nu, double sigma, double beta_threshold) {
    if (!(sigma > 0.0)) throw std::invalid_argument("unique_gamma: sigma must be positive");
    return normal_cdf((beta_threshold - nu) / sigma);
}

std::pair<double, double> noncausal_sigmoid_params(const GaussMixtureModel& model) {
    if (!(model.gamma > 0.0 && model.gamma < 1.0))
        throw std::invalid_argument(
            "noncausal_sigmoid_params: gamma must lie strictly inside (0, 1)");
    const double rho2 = model.rho * model.rho;
    const double alpha = (model.nu0 - model.nu1) / rho2;
    const double beta = ((1.0 - model.gamma) / model.gamma) *
                        std::exp((model.nu1 * model.nu1 - model.nu0 * model.nu0) / (2.0 * rho2));
    return {alpha, beta};
}

double tanh_kernel_probability(const TanhBinaryKernel& kernel, const std::vector<int>& inputs) {
    if (inputs.size() != kernel.lambda.size())
        throw std::invalid_argument("tanh_kernel_probability: input count mismatch");
    double arg = kernel.lambda0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (inputs[i] != 0 && inputs[i] != 1)
            throw std::invalid_argument("tanh_kernel_probability: inputs must be bits");
        arg += kernel.lambda[i] * inputs[i];
    }
    return 0.5 * (1.0 + std::tanh(arg));
}

TanhBinaryKernel or_gate_kernel(double k, int n_inputs) {
    if (!(k > 0.0)) throw std::invalid_argument("or_gate_kernel: sharpness must be positive");
    if (n_inputs < 1) throw std::invalid_argument("or_gate_kernel: need at least one input");
    TanhBinaryKernel kernel;
    kernel.lambda0 = -k;
    kernel.lambda.assign(static_cast<std::size_t>(n_inputs), 2.0 * k);
    return kernel;
}

OrJointTable::OrJointTable(int n, double k) : n_(n), k_(k) {
    if (n < 3 || n > 12)
        throw std::invalid_argument("or_joint_table: variable count must lie in [3, 12]");
    const TanhBinaryKernel gate = or_gate_kernel(k, n - 1);
    const int inputs = n - 1;
    const double input_weight = std::pow(0.5, inputs);
    joint_.assign(std::size_t{1} << n, 0.0);
    std::vector<int> bits(static_cast<std::size_t>(inputs));
    for (int s = 0; s < (1 << inputs); ++s) {
        for (int i = 0; i < inputs; ++i) bits[static_cast<std::size_t>(i)] = (s >> i) & 1;
        const double p1 = tanh_kernel_probability(gate, bits);
        joint_[static_cast<std::size_t>(s)] = input_weight * (1.0 - p1);          // x_n = 0
        joint_[static_cast<std::size_t>(s) | (std::size_t{1} << inputs)] =
            input_weight * p1;                                                    // x_n = 1
    }
}

double OrJointTable::joint_probability(const std::vector<int>& state) const {
    if (static_cast<int>(state.size()) != n_)
        throw std::invalid_argument("joint_probability: state length mismatch");
    std::size_t id = 0;
    for (int i = 0; i < n_; ++i) {
        if (state[static_cast<std::size_t>(i)] != 0 && state[static_cast<std::size_t>(i)] != 1)
            throw std::invalid_argument("joint_probability: state entries must be bits");
        if (state[static_cast<std::size_t>(i)]) id |= std::size_t{1} << i;
    }
    return joint_[id];
}

double OrJointTable::conditional(int target, const std::vector<std::pair<int, int>>& fixed) const {
    if (target < 0 || target >= n_)
        throw std::invalid_argument("conditional: target index out of range");
    std::size_t fixed_mask = 0, fixed_bits = 0;
    for (const auto& [var, bit] : fixed) {
        if (var < 0 || var >= n_) throw std::invalid_argument("conditional: variable out of range");
        if (var == target) throw std::invalid_argument("conditional: target cannot be fixed");
        if (bit != 0 && bit != 1) throw std::invalid_argument("conditional: bits only");
        fixed_mask |= std::size_t{1} << var;
        if (bit) fixed_bits |= std::size_t{1} << var;
    }
    double event = 0.0, with_target = 0.0;
    for (std::size_t id = 0; id < joint_.size(); ++id) {
        if ((id & fixed_mask) != fixed_bits) continue;
        event += joint_[id];
        if (id & (std::size_t{1} << target)) with_target += joint_[id];
    }
    if (event <= 0.0) {
        std::stringstream msg;
        msg << "conditional: the conditioning event has probability zero";
        throw std::invalid_argument(msg.str());
    }
    return with_target / event;
}

ConditionalTable OrJointTable::causal_table() const {
    const int inputs = n_ - 1;
    ConditionalTable table;
    table.input_count = inputs;
    for (int s = 0; s < (1 << inputs); ++s) {
        ConditionalTable::Entry e;
        e.bits.resize(static_cast<std::size_t>(inputs));
        for (int i = 0; i < inputs; ++i) e.bits[static_cast<std::size_t>(i)] = (s >> i) & 1;
        const std::size_t id0 = static_cast<std::size_t>(s);
        const std::size_t id1 = id0 | (std::size_t{1} << inputs);
        e.weight = joint_[id0] + joint_[id1];
        e.probability = e.weight > 0.0 ? joint_[id1] / e.weight : 0.0;
        if (e.weight > 0.0) table.entries.push_back(std::move(e));
    }
    return table;
}

ConditionalTable OrJointTable::reverse_table() const {
    const int cond_vars = n_ - 1;  // x_2 .. x_n
    ConditionalTable table;
    table.input_count = cond_vars;
    for (int s = 0; s < (1 << cond_vars); ++s) {
        // Conditioning assignment: bit i of s is x_{i+2}'s value.
        std::size_t base = 0;
        for (int i = 0; i < cond_vars; ++i)
            if ((s >> i) & 1) base |= std::size_t{1} << (i + 1);
        const double p0 = joint_[base];                      // x_1 = 0
        const double p1 = joint_[base | std::size_t{1}];     // x_1 = 1
        const double w = p0 + p1;
        if (w <= 0.0) continue;  // the event cannot occur
        ConditionalTable::Entry e;
        e.bits.resize(static_cast<std::size_t>(cond_vars));
        for (int i = 0; i < cond_vars; ++i) e.bits[static_cast<std::size_t>(i)] = (s >> i) & 1;
        e.probability = p1 / w;
        e.weight = w;
        table.entries.push_back(std::move(e));
    }
    return table;
}

OrJointTable or_joint_table(int n, double k) { return OrJointTable(n, k); }

namespace {

/// Multilinear monomial basis over `input_count` bits up to `degree`:
/// all subsets of size <= degree, ordered by size then lexicographically.
std::vector<std::vector<int>> monomial_basis(int input_count, int degree) {
    std::vector<std::vector<int>> basis{{}};  // the constant
    std::vector<std::vector<int>> frontier{{}};
    for (int size = 1; size <= std::min(degree, input_count); ++size) {
        std::vector<std::vector<int>> next;
        for (const auto& subset : frontier) {
            const int start = subset.empty() ? 0 : subset.back() + 1;
            for (int v = start; v < input_count; ++v) {
                std::vector<int> grown = subset;
                grown.push_back(v);
                next.push_back(grown);
            }
        }
        basis.insert(basis.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    return basis;
}

constexpr double kAtanhClamp = 20.0;

struct FitTarget {
    double value = 0.0;   // atanh target, or the clamp for saturated entries
    int side = 0;         // 0: two-sided, +1: fit must be >= value, -1: <= value
    double weight = 0.0;
};

/// Weighted least squares with one-sided (hinge) targets.  The convex
/// objective sum_e w_e * r_e^2 (hinge residuals clamped to the violating
/// side) is minimized by alternating exact LS solves, where each solve
/// includes the two-sided rows plus the hinges the previous fit violated.
/// Every candidate is scored against the true clamped objective and the
/// best value seen is returned, so a late oscillation of the active set
/// can never discard an already-found satisfying fit.
double hinge_least_squares(const Eigen::MatrixXd& design, const std::vector<FitTarget>& targets,
                           double total_weight) {
    const Eigen::Index rows = design.rows();
    const Eigen::Index cols = design.cols();

    const auto clamped_rms = [&](const Eigen::VectorXd& fitted) {
        double ss = 0.0;
        for (Eigen::Index e = 0; e < rows; ++e) {
            const FitTarget& t = targets[static_cast<std::size_t>(e)];
            double r = fitted[e] - t.value;
            if (t.side > 0) r = std::min(0.0, r);
            if (t.side < 0) r = std::max(0.0, r);
            ss += t.weight * r * r;
        }
        return std::sqrt(ss / total_weight);
    };

    std::vector<char> active(static_cast<std::size_t>(rows), 1);
    std::vector<char> previous;
    double best = clamped_rms(Eigen::VectorXd::Zero(rows));

    for (int pass = 0; pass < 200; ++pass) {
        Eigen::VectorXd sqw(rows);
        Eigen::VectorXd target(rows);
        bool any_row = false;
        for (Eigen::Index e = 0; e < rows; ++e) {
            const FitTarget& t = targets[static_cast<std::size_t>(e)];
            const bool on = t.side == 0 || active[static_cast<std::size_t>(e)];
            sqw[e] = on ? std::sqrt(t.weight) : 0.0;
            target[e] = t.value;
            any_row = any_row || (on && t.weight > 0.0);
        }
        if (!any_row) break;  // everything satisfied by the previous fit
        const Eigen::MatrixXd a = sqw.asDiagonal() * design;
        const Eigen::VectorXd b = sqw.cwiseProduct(target);
        const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
        const Eigen::VectorXd fitted = design * coef;
        best = std::min(best, clamped_rms(fitted));
        if (best == 0.0) break;

        std::vector<char> next(static_cast<std::size_t>(rows), 0);
        for (Eigen::Index e = 0; e < rows; ++e) {
            const FitTarget& t = targets[static_cast<std::size_t>(e)];
            if (t.side == 0) continue;
            const bool satisfied =
                t.side > 0 ? fitted[e] >= t.value : fitted[e] <= t.value;
            next[static_cast<std::size_t>(e)] = satisfied ? 0 : 1;
        }
        if (next == active || next == previous) break;  // fixed point or 2-cycle
        previous = std::move(active);
        active = std::move(next);
    }
    return best;
}

}  // namespace

DegreeFit minimal_tanh_degree(const ConditionalTable& table, int max_degree,
                              double fit_tolerance) {
    if (max_degree < 0) throw std::invalid_argument("minimal_tanh_degree: negative max degree");
    if (!(fit_tolerance > 0.0))
        throw std::invalid_argument("minimal_tanh_degree: fit tolerance must be positive");
    if (table.entries.empty())
        throw std::invalid_argument("minimal_tanh_degree: empty conditional table");

    std::vector<FitTarget> targets;
    std::vector<const std::vector<int>*> rows;
    double total_weight = 0.0;
    for (const auto& entry : table.entries) {
        if (static_cast<int>(entry.bits.size()) != table.input_count)
            throw std::invalid_argument("minimal_tanh_degree: entry width mismatch");
        if (!(entry.weight >= 0.0) || !(entry.probability >= 0.0 && entry.probability <= 1.0))
            throw std::invalid_argument("minimal_tanh_degree: malformed table entry");
        if (entry.weight == 0.0) continue;
        FitTarget t;
        t.weight = entry.weight;
        const double u = 2.0 * entry.probability - 1.0;
        if (u >= 1.0) {
            t.value = kAtanhClamp;
            t.side = +1;  // saturated high: any fit beyond the clamp is exact
        } else if (u <= -1.0) {
            t.value = -kAtanhClamp;
            t.side = -1;
        } else {
            t.value = std::atanh(u);
            t.side = 0;
        }
        targets.push_back(t);
        rows.push_back(&entry.bits);
        total_weight += entry.weight;
    }
    if (targets.empty())
        throw std::invalid_argument("minimal_tanh_degree: all table entries have zero weight");

    DegreeFit out;
    out.degree = max_degree + 1;
    for (int d = 0; d <= max_degree; ++d) {
        const auto basis = monomial_basis(table.input_count, d);
        Eigen::MatrixXd design(static_cast<Eigen::Index>(rows.size()),
                               static_cast<Eigen::Index>(basis.size()));
        for (std::size_t e = 0; e < rows.size(); ++e)
            for (std::size_t m = 0; m < basis.size(); ++m) {
                int value = 1;
                for (int var : basis[m]) value *= (*rows[e])[static_cast<std::size_t>(var)];
                design(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(m)) = value;
            }
        const double rms = hinge_least_squares(design, targets, total_weight);
        out.rms_residuals.push_back(rms);
        if (rms <= fit_tolerance) {
            out.degree = d;
            out.fitted = true;
            break;
        }
    }
    return out;
}

}  // namespace secord
