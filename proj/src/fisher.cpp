#include "secord/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "secord/mathutil.hpp"
#include "secord/optimize.hpp"

namespace secord {
namespace {

constexpr double kUnderflowFloor = 1e-300;

/// 1 / (1 + e^-u) without overflow for large |u|.
double sigmoid_stable(double u) {
    if (u >= 0.0) {
        return 1.0 / (1.0 + std::exp(-u));
    }
    const double e = std::exp(u);
    return e / (1.0 + e);
}

Eigen::VectorXd fd_grad_log(const std::function<double(const Eigen::VectorXd&)>& log_density,
                            const Eigen::VectorXd& theta, double fd_step) {
    Eigen::VectorXd grad(theta.size());
    Eigen::VectorXd probe = theta;
    for (int i = 0; i < theta.size(); ++i) {
        probe(i) = theta(i) + fd_step;
        const double up = log_density(probe);
        probe(i) = theta(i) - fd_step;
        const double down = log_density(probe);
        probe(i) = theta(i);
        grad(i) = (up - down) / (2.0 * fd_step);
    }
    return grad;
}

void check_underflow(long underflowed, long total, const char* what) {
    if (total > 0 && underflowed * 100 > total) {
        std::ostringstream msg;
        msg << what << ": density underflowed on " << underflowed << " of " << total
            << " grid nodes (more than 1%); narrow the truncation window or reduce "
               "the grid extent";
        throw std::runtime_error(msg.str());
    }
}

double finalize_smallest_eigenvalue(FisherMatrix& fm) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fm.matrix);
    fm.smallest_eigenvalue = es.eigenvalues().minCoeff();
    return fm.smallest_eigenvalue;
}

double mixture_density(const Eigen::Vector4d& theta, double y) {
    const double gamma = theta(0);
    return gamma * normal_pdf(y, theta(1), theta(3)) +
           (1.0 - gamma) * normal_pdf(y, theta(2), theta(3));
}

/// Partial derivatives of the mixture density (not its log) with respect to
/// (gamma, nu0, nu1, rho).
Eigen::Vector4d mixture_density_grad(const Eigen::Vector4d& theta, double y) {
    const double gamma = theta(0);
    const double nu0 = theta(1);
    const double nu1 = theta(2);
    const double rho = theta(3);
    const double n0 = normal_pdf(y, nu0, rho);
    const double n1 = normal_pdf(y, nu1, rho);
    const double d0 = y - nu0;
    const double d1 = y - nu1;
    const double r2 = rho * rho;
    Eigen::Vector4d g;
    g(0) = n0 - n1;
    g(1) = gamma * n0 * d0 / r2;
    g(2) = (1.0 - gamma) * n1 * d1 / r2;
    g(3) = gamma * n0 * (d0 * d0 / (r2 * rho) - 1.0 / rho) +
           (1.0 - gamma) * n1 * (d1 * d1 / (r2 * rho) - 1.0 / rho);
    return g;
}

std::mt19937_64 cell_rng(unsigned seed, std::size_t size_index, unsigned stream) {
    // Distinct, reproducible stream per (seed, sample size, stage).
    const std::uint64_t mix = 0x9E3779B97F4A7C15ULL;
    std::uint64_t state = seed;
    state = (state + size_index + 1) * mix;
    state = (state + stream + 1) * mix;
    return std::mt19937_64(state);
}

double median_of(std::vector<double> v) { return median(std::move(v)); }

}  // namespace

int FisherMatrix::rank(double rel_tol) const { return numeric_rank(matrix, rel_tol); }

FisherMatrix fisher_marginal(const DensityFamily& family, const Eigen::VectorXd& theta,
                             const QuadratureGrid& grid, double fd_step) {
    if (!family.density) {
        throw std::invalid_argument("fisher_marginal: family has no density function");
    }
    const int p = family.parameter_count();
    FisherMatrix out;
    out.parameter_labels = family.parameter_labels;
    out.matrix = Eigen::MatrixXd::Zero(p, p);

    long underflowed = 0;
    for (Eigen::Index m = 0; m < grid.count(); ++m) {
        const Eigen::VectorXd x = grid.nodes.col(m);
        const double density = family.density(theta, x);
        if (!std::isfinite(density) || density < 0.0) {
            std::ostringstream msg;
            msg << "fisher_marginal: density is invalid (" << density << ") at grid node " << m;
            throw std::runtime_error(msg.str());
        }
        if (density < kUnderflowFloor) {
            ++underflowed;
            continue;
        }
        Eigen::VectorXd score;
        if (family.grad_log) {
            score = family.grad_log(theta, x);
        } else {
            score = fd_grad_log(
                [&](const Eigen::VectorXd& t) { return std::log(family.density(t, x)); }, theta,
                fd_step);
        }
        out.matrix.noalias() += (grid.weights(m) * density) * (score * score.transpose());
    }
    check_underflow(underflowed, grid.count(), "fisher_marginal");
    out.matrix = ((out.matrix + out.matrix.transpose()) / 2.0).eval();
    finalize_smallest_eigenvalue(out);
    return out;
}

FisherMatrix fisher_conditional(const ConditionalDensityFamily& conditional,
                                const Eigen::VectorXd& eta, const DensityFamily& input_family,
                                const Eigen::VectorXd& theta, const QuadratureGrid& input_grid,
                                const QuadratureGrid& output_grid, double fd_step) {
    if (!conditional.density) {
        throw std::invalid_argument("fisher_conditional: family has no density function");
    }
    const int p = conditional.parameter_count();
    FisherMatrix out;
    out.parameter_labels = conditional.parameter_labels;
    out.matrix = Eigen::MatrixXd::Zero(p, p);

    long underflowed = 0;
    long total = 0;
    for (Eigen::Index a = 0; a < input_grid.count(); ++a) {
        const Eigen::VectorXd u = input_grid.nodes.col(a);
        const double input_density = input_family.density(theta, u);
        if (!std::isfinite(input_density) || input_density < 0.0) {
            std::ostringstream msg;
            msg << "fisher_conditional: input density is invalid (" << input_density
                << ") at grid node " << a;
            throw std::runtime_error(msg.str());
        }
        if (input_density < kUnderflowFloor) {
            underflowed += output_grid.count();
            total += output_grid.count();
            continue;
        }
        const double outer = input_grid.weights(a) * input_density;
        for (Eigen::Index b = 0; b < output_grid.count(); ++b) {
            ++total;
            const Eigen::VectorXd v = output_grid.nodes.col(b);
            const double cond_density = conditional.density(eta, v, u);
            if (!std::isfinite(cond_density) || cond_density < 0.0) {
                std::ostringstream msg;
                msg << "fisher_conditional: conditional density is invalid (" << cond_density
                    << ") at output node " << b << ", input node " << a;
                throw std::runtime_error(msg.str());
            }
            if (cond_density < kUnderflowFloor) {
                ++underflowed;
                continue;
            }
            Eigen::VectorXd score;
            if (conditional.grad_log) {
                score = conditional.grad_log(eta, v, u);
            } else {
                score = fd_grad_log(
                    [&](const Eigen::VectorXd& e) {
                        return std::log(conditional.density(e, v, u));
                    },
                    eta, fd_step);
            }
            out.matrix.noalias() +=
                (outer * output_grid.weights(b) * cond_density) * (score * score.transpose());
        }
    }
    check_underflow(underflowed, total, "fisher_conditional");
    out.matrix = ((out.matrix + out.matrix.transpose()) / 2.0).eval();
    finalize_smallest_eigenvalue(out);
    return out;
}

DensityFamily bernoulli_family() {
    DensityFamily f;
    f.parameter_labels = {"theta"};
    f.density = [](const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
        const double t = theta(0);
        return x(0) > 0.5 ? t : 1.0 - t;
    };
    f.grad_log = [](const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
        const double t = theta(0);
        Eigen::VectorXd g(1);
        g(0) = x(0) > 0.5 ? 1.0 / t : -1.0 / (1.0 - t);
        return g;
    };
    return f;
}

DensityFamily gaussian_family() {
    DensityFamily f;
    f.parameter_labels = {"nu", "sigma"};
    f.density = [](const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
        return normal_pdf(x(0), theta(0), theta(1));
    };
    f.grad_log = [](const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
        const double d = x(0) - theta(0);
        const double s = theta(1);
        Eigen::VectorXd g(2);
        g(0) = d / (s * s);
        g(1) = -1.0 / s + d * d / (s * s * s);
        return g;
    };
    return f;
}

DensityFamily mixture_marginal_family() {
    DensityFamily f;
    f.parameter_labels = {"gamma", "nu0", "nu1", "rho"};
    f.density = [](const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
        return mixture_density(theta.head<4>(), x(0));
    };
    f.grad_log = [](const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
        const Eigen::Vector4d t = theta.head<4>();
        const double p = mixture_density(t, x(0));
        return Eigen::VectorXd(mixture_density_grad(t, x(0)) / p);
    };
    return f;
}

ConditionalDensityFamily logistic_conditional_family() {
    ConditionalDensityFamily f;
    f.parameter_labels = {"alpha", "beta"};
    f.density = [](const Eigen::VectorXd& eta, const Eigen::VectorXd& output,
                   const Eigen::VectorXd& input) {
        const double alpha = eta(0);
        const double beta = eta(1);
        if (beta <= 0.0) {
            throw std::invalid_argument("logistic_conditional_family: beta must be positive");
        }
        const double y = input(0);
        // p(x=1|y) = 1 / (beta e^(alpha y) + 1) = sigmoid(-(alpha y + log beta))
        const double p1 = sigmoid_stable(-(alpha * y + std::log(beta)));
        return output(0) > 0.5 ? p1 : 1.0 - p1;
    };
    f.grad_log = [](const Eigen::VectorXd& eta, const Eigen::VectorXd& output,
                    const Eigen::VectorXd& input) {
        const double alpha = eta(0);
        const double beta = eta(1);
        const double y = input(0);
        // h = beta e^(alpha y) + 1; p1 = 1/h, p0 = (h-1)/h.
        // grad log p1 = -grad h / h; grad log p0 = grad h / (h-1) - grad h / h,
        // written in a form that stays finite as h -> 1.
        const double e = std::exp(alpha * y);
        const double h = beta * e + 1.0;
        Eigen::VectorXd g(2);
        if (output(0) > 0.5) {
            g(0) = -y * beta * e / h;
            g(1) = -e / h;
        } else {
            g(0) = y - y * beta * e / h;
            g(1) = 1.0 / beta - e / h;
        }
        return g;
    };
    return f;
}

ConditionalDensityFamily sigmoid_response_conditional_family(const QuadratureGrid& grid) {
    if (grid.dimension() != 1) {
        throw std::invalid_argument(
            "sigmoid_response_conditional_family: the normalization grid must be "
            "one-dimensional");
    }
    ConditionalDensityFamily f;
    f.parameter_labels = {"sigma", "nu", "alpha", "beta"};
    // The grid is captured by value so the family stays valid on its own.
    f.density = [grid](const Eigen::VectorXd& eta, const Eigen::VectorXd& output,
                       const Eigen::VectorXd& input) {
        const double sigma = eta(0);
        const double nu = eta(1);
        const double alpha = eta(2);
        const double beta = eta(3);
        if (sigma <= 0.0) {
            throw std::invalid_argument(
                "sigmoid_response_conditional_family: sigma must be positive");
        }
        const bool on = input(0) > 0.5;
        const double y = output(0);
        auto gate = [&](double yy) {
            const double s1 = sigmoid_stable(-2.0 * (alpha * yy + beta));
            return on ? s1 : 1.0 - s1;
        };
        double z = 0.0;
        for (Eigen::Index m = 0; m < grid.count(); ++m) {
            const double yy = grid.nodes(0, m);
            z += grid.weights(m) * normal_pdf(yy, nu, sigma) * gate(yy);
        }
        if (!(z > 0.0)) {
            throw std::runtime_error(
                "sigmoid_response_conditional_family: normalizer vanished on the grid");
        }
        return normal_pdf(y, nu, sigma) * gate(y) / z;
    };
    return f;
}

double marginal_response_probability(const Eigen::Vector4d& eta, const QuadratureGrid& grid) {
    const double sigma = eta(0);
    const double nu = eta(1);
    const double alpha = eta(2);
    const double beta = eta(3);
    if (sigma <= 0.0) {
        throw std::invalid_argument("marginal_response_probability: sigma must be positive");
    }
    double p = 0.0;
    double total = 0.0;
    for (Eigen::Index m = 0; m < grid.count(); ++m) {
        const double y = grid.nodes(0, m);
        const double w = grid.weights(m) * normal_pdf(y, nu, sigma);
        p += w * sigmoid_stable(-2.0 * (alpha * y + beta));
        total += w;
    }
    if (!(total > 0.0)) {
        throw std::runtime_error("marginal_response_probability: density vanished on the grid");
    }
    return p / total;
}

Eigen::Vector4d response_family_params(const GaussSigmoidModel& model) {
    // (1 + tanh(a y + b)) / 2 = 1 / (1 + e^(-2 a y - 2 b)), so the
    // e^(2 alpha y + 2 beta) convention flips both response coefficients.
    return Eigen::Vector4d(model.sigma, model.nu, -model.alpha, -model.beta);
}

Eigen::Matrix4d appendix_matrix_pyx(const Eigen::Vector4d& eta, double base_point,
                                    const Eigen::Vector4d& points) {
    const double sigma = eta(0);
    const double nu = eta(1);
    const double alpha = eta(2);
    const double beta = eta(3);
    if (sigma <= 0.0) {
        throw std::invalid_argument("appendix_matrix_pyx: sigma must be positive");
    }
    auto h = [&](double y) {
        // Partials of log[N(y; nu, sigma^2) * sigmoid(-2 alpha y - 2 beta)]
        // in y-dependent terms only; constants cancel in the differences.
        const double d = y - nu;
        const double s = sigmoid_stable(2.0 * (alpha * y + beta));  // e^u / (1 + e^u)
        Eigen::Vector4d v;
        v(0) = d * d / (sigma * sigma * sigma);  // d/d sigma
        v(1) = d / (sigma * sigma);              // d/d nu
        v(2) = -2.0 * y * s;                     // d/d alpha
        v(3) = -2.0 * s;                         // d/d beta
        return v;
    };
    const Eigen::Vector4d base = h(base_point);
    Eigen::Matrix4d m;
    for (int i = 0; i < 4; ++i) {
        m.col(i) = h(points(i)) - base;
    }
    return m;
}

Eigen::Matrix4d appendix_matrix_py(const Eigen::Vector4d& theta, const Eigen::Vector4d& points) {
    if (theta(3) <= 0.0) {
        throw std::invalid_argument("appendix_matrix_py: rho must be positive");
    }
    Eigen::Matrix4d m;
    for (int i = 0; i < 4; ++i) {
        m.col(i) = mixture_density_grad(theta, points(i));
    }
    return m;
}

Eigen::Matrix2d appendix_matrix_pxy(const Eigen::Vector2d& eta, const Eigen::Vector2d& points) {
    const double alpha = eta(0);
    const double beta = eta(1);
    // beta = 0 is allowed: the d/d alpha row vanishes and the matrix is
    // singular, which is exactly what degeneracy diagnostics look for.
    Eigen::Matrix2d m;
    for (int i = 0; i < 2; ++i) {
        // p(x=1|y) = 1/h with h = beta e^(alpha y) + 1.
        const double y = points(i);
        const double e = std::exp(alpha * y);
        const double h = beta * e + 1.0;
        m(0, i) = -y * beta * e / (h * h);  // d/d alpha
        m(1, i) = -e / (h * h);             // d/d beta
    }
    return m;
}

double smallest_singular_value_row_normalized(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd scaled = m;
    for (Eigen::Index r = 0; r < scaled.rows(); ++r) {
        const double norm = scaled.row(r).norm();
        if (norm > 0.0) {
            scaled.row(r) /= norm;
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
    return svd.singularValues().minCoeff();
}

int numeric_rank(const Eigen::MatrixXd& m, double rel_tol) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0.0) {
        return 0;
    }
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > rel_tol * sv(0)) {
            ++rank;
        }
    }
    return rank;
}

MixtureFit fit_gauss_mixture_mle(const std::vector<double>& y, int max_iterations,
                                 double tolerance) {
    const std::size_t n = y.size();
    if (n < 4) {
        throw std::invalid_argument("fit_gauss_mixture_mle: need at least 4 samples");
    }
    std::vector<double> sorted = y;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t half = n / 2;
    const double mean_low =
        std::accumulate(sorted.begin(), sorted.begin() + half, 0.0) / static_cast<double>(half);
    const double mean_high = std::accumulate(sorted.begin() + half, sorted.end(), 0.0) /
                             static_cast<double>(n - half);
    const double mean_all = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
    double var_all = 0.0;
    for (double v : sorted) {
        var_all += (v - mean_all) * (v - mean_all);
    }
    var_all /= static_cast<double>(n);

    double gamma = 0.5;
    double nu0 = mean_low;
    double nu1 = mean_high;
    double rho = std::max(std::sqrt(var_all / 2.0), 1e-6);
    if (nu1 - nu0 < 1e-12) {
        nu1 = nu0 + 1e-6;  // nudge apart so EM can separate the components
    }

    MixtureFit fit;
    double prev_ll = -std::numeric_limits<double>::infinity();
    std::vector<double> resp(n);
    for (int iter = 1; iter <= max_iterations; ++iter) {
        // E step: responsibility of component 0 per sample, plus the loglik.
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = (1.0 - gamma) * normal_pdf(y[i], nu0, rho);
            const double b = gamma * normal_pdf(y[i], nu1, rho);
            const double s = a + b;
            resp[i] = s > 0.0 ? a / s : 0.5;
            ll += s > 0.0 ? std::log(s) : -745.0;
        }
        ll /= static_cast<double>(n);

        // M step with a shared component width.
        double w0 = 0.0;
        double s0 = 0.0;
        double s1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w0 += resp[i];
            s0 += resp[i] * y[i];
            s1 += (1.0 - resp[i]) * y[i];
        }
        const double w1 = static_cast<double>(n) - w0;
        gamma = w1 / static_cast<double>(n);
        if (w0 > 1e-12) {
            nu0 = s0 / w0;
        }
        if (w1 > 1e-12) {
            nu1 = s1 / w1;
        }
        double ssq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d0 = y[i] - nu0;
            const double d1 = y[i] - nu1;
            ssq += resp[i] * d0 * d0 + (1.0 - resp[i]) * d1 * d1;
        }
        rho = std::max(std::sqrt(ssq / static_cast<double>(n)), 1e-8);

        fit.iterations = iter;
        fit.loglik_per_sample = ll;
        if (std::abs(ll - prev_ll) < tolerance) {
            fit.converged = true;
            break;
        }
        prev_ll = ll;
    }

    if (nu0 > nu1) {
        std::swap(nu0, nu1);
        gamma = 1.0 - gamma;
    }
    gamma = std::min(std::max(gamma, 1e-12), 1.0 - 1e-12);
    fit.model = GaussMixtureModel(gamma, nu0, nu1, rho);
    return fit;
}

LogisticFit fit_inverse_logistic_mle(const std::vector<std::pair<double, double>>& xy) {
    const std::size_t n = xy.size();
    if (n < 2) {
        throw std::invalid_argument("fit_inverse_logistic_mle: need at least 2 samples");
    }
    // p(x=1|y) = sigmoid(-(alpha y + log beta)), so with t = 1 - x this is a
    // logistic regression p(t=1|y) = sigmoid(w0 + w1 y), w0 = log beta,
    // w1 = alpha.  Newton iteration from zero.
    Eigen::Vector2d w = Eigen::Vector2d::Zero();
    LogisticFit fit;
    for (int iter = 0; iter < 100; ++iter) {
        Eigen::Vector2d grad = Eigen::Vector2d::Zero();
        Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
        for (const auto& [x, y] : xy) {
            const double t = 1.0 - x;
            const double p = sigmoid_stable(w(0) + w(1) * y);
            const Eigen::Vector2d feat(1.0, y);
            grad += (t - p) * feat;
            hess += p * (1.0 - p) * feat * feat.transpose();
        }
        hess += 1e-12 * Eigen::Matrix2d::Identity();
        const Eigen::Vector2d step = hess.ldlt().solve(grad);
        w += step;
        if (w.cwiseAbs().maxCoeff() > 50.0) {
            // Perfectly separated data: the likelihood has no interior
            // maximum.  Report the current point; callers treat the cell as
            // non-converged.
            fit.converged = false;
            break;
        }
        if (grad.cwiseAbs().maxCoeff() < 1e-10 * static_cast<double>(n) ||
            step.cwiseAbs().maxCoeff() < 1e-12) {
            fit.converged = true;
            break;
        }
    }
    fit.alpha = w(1);
    fit.beta = std::exp(w(0));
    return fit;
}

SigmoidConditionalFit fit_sigmoid_conditional_mle(const std::vector<std::pair<double, double>>& xy,
                                                  const QuadratureGrid& grid) {
    const std::size_t n = xy.size();
    if (n < 4) {
        throw std::invalid_argument("fit_sigmoid_conditional_mle: need at least 4 samples");
    }

    // Moment-based start: Gaussian moments for (nu, sigma), a logistic
    // regression of the response on y for (alpha, beta).
    double mean_y = 0.0;
    for (const auto& [x, y] : xy) {
        (void)x;
        mean_y += y;
    }
    mean_y /= static_cast<double>(n);
    double var_y = 0.0;
    for (const auto& [x, y] : xy) {
        (void)x;
        var_y += (y - mean_y) * (y - mean_y);
    }
    var_y = std::max(var_y / static_cast<double>(n), 1e-8);
    const LogisticFit logi = fit_inverse_logistic_mle(xy);
    // p(x=1|y) = sigmoid(-(a y + log b)) matches sigmoid(-2 alpha y - 2 beta).
    const double alpha0 = logi.alpha / 2.0;
    const double beta0 = std::log(logi.beta) / 2.0;

    // Parameters are (log sigma, nu, alpha, beta); the log keeps sigma
    // positive without an explicit constraint.
    auto unpack = [](const Eigen::VectorXd& q) {
        return Eigen::Vector4d(std::exp(q(0)), q(1), q(2), q(3));
    };
    auto negloglik = [&](const Eigen::VectorXd& q) {
        const Eigen::Vector4d eta = unpack(q);
        const double sigma = eta(0);
        const double nu = eta(1);
        const double alpha = eta(2);
        const double beta = eta(3);
        // Normalizers for both response values, shared across samples.
        double z1 = 0.0;
        double z0 = 0.0;
        for (Eigen::Index m = 0; m < grid.count(); ++m) {
            const double yy = grid.nodes(0, m);
            const double w = grid.weights(m) * normal_pdf(yy, nu, sigma);
            const double s1 = sigmoid_stable(-2.0 * (alpha * yy + beta));
            z1 += w * s1;
            z0 += w * (1.0 - s1);
        }
        if (!(z1 > 0.0) || !(z0 > 0.0)) {
            return std::numeric_limits<double>::infinity();
        }
        double nll = 0.0;
        for (const auto& [x, y] : xy) {
            const double d = y - nu;
            const double log_gauss =
                -std::log(sigma) - 0.5 * std::log(2.0 * M_PI) - d * d / (2.0 * sigma * sigma);
            const double u = -2.0 * (alpha * y + beta);
            // log sigmoid(u) and log(1 - sigmoid(u)) without overflow.
            const double log_s1 = u >= 0.0 ? -std::log1p(std::exp(-u)) : u - std::log1p(std::exp(u));
            const double log_s0 = -u >= 0.0 ? -std::log1p(std::exp(u)) : -u - std::log1p(std::exp(-u));
            const bool on = x > 0.5;
            nll -= log_gauss + (on ? log_s1 : log_s0) - std::log(on ? z1 : z0);
        }
        return nll / static_cast<double>(n);
    };
    auto objective = [&](const Eigen::VectorXd& q, Eigen::VectorXd& grad) {
        const double f = negloglik(q);
        grad.resize(q.size());
        const double step = 1e-6;
        Eigen::VectorXd probe = q;
        for (int i = 0; i < q.size(); ++i) {
            probe(i) = q(i) + step;
            const double up = negloglik(probe);
            probe(i) = q(i) - step;
            const double down = negloglik(probe);
            probe(i) = q(i);
            grad(i) = (up - down) / (2.0 * step);
        }
        return f;
    };

    Eigen::VectorXd q0(4);
    q0 << 0.5 * std::log(var_y), mean_y, alpha0, beta0;
    BfgsOptions opts;
    opts.max_iterations = 300;
    opts.gradient_tolerance = 1e-7;
    const BfgsResult res = minimize_bfgs(objective, q0, opts);

    SigmoidConditionalFit fit;
    fit.eta = unpack(res.x);
    fit.converged = res.converged;
    return fit;
}

namespace {

/// Draw y from the sigmoid-response conditional p_eta(y | x) by rejection
/// against the Gaussian envelope (the gate is bounded by 1).
double sample_sigmoid_response(const Eigen::Vector4d& eta, bool on, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(eta(1), eta(0));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int attempt = 0; attempt < 1000000; ++attempt) {
        const double y = gauss(rng);
        const double s1 = 1.0 / (1.0 + std::exp(2.0 * (eta(2) * y + eta(3))));
        const double accept = on ? s1 : 1.0 - s1;
        if (unif(rng) < accept) {
            return y;
        }
    }
    throw std::runtime_error(
        "sample_sigmoid_response: rejection sampler failed to accept; the gate "
        "suppresses essentially the whole Gaussian envelope");
}

DependenceReport run_split_sample(SplitDirection direction, const GaussMixtureModel& mixture,
                                  const Eigen::Vector4d& eta_star, double theta_star,
                                  double modified_input_param, const SplitSampleOptions& options) {
    if (options.sample_sizes.empty()) {
        throw std::invalid_argument("split_sample_experiment: sample_sizes must be nonempty");
    }
    if (options.seeds.empty()) {
        throw std::invalid_argument("split_sample_experiment: seeds must be nonempty");
    }
    for (long k : options.sample_sizes) {
        if (k < 8) {
            throw std::invalid_argument(
                "split_sample_experiment: every sample size must be at least 8");
        }
    }

    // The anti-causal map in closed form, f(theta) -> (alpha, beta).
    auto anticausal = [](const GaussMixtureModel& m) {
        const auto [a, b] = noncausal_sigmoid_params(m);
        return Eigen::Vector2d(a, b);
    };

    // Quadrature window for response-probability integrals, wide enough for
    // every eta encountered (truth and per-cell perturbations).
    TruncationSpec trunc;
    QuadratureGrid response_grid;
    if (direction == SplitDirection::SigmoidForward) {
        trunc.center = eta_star(1);
        trunc.half_width = kDefaultTruncationSigmas * eta_star(0) + 2.0;
        response_grid = build_grid(ValueDomain::full_real(), kDefaultGridResolution, trunc);
    }

    DependenceReport report;
    report.sample_sizes = options.sample_sizes;
    report.independence_control = options.independence_control;

    for (std::size_t ki = 0; ki < options.sample_sizes.size(); ++ki) {
        const long k = options.sample_sizes[ki];
        std::vector<double> residuals;
        std::vector<double> proxies;
        for (unsigned seed : options.seeds) {
            std::mt19937_64 rng_input = cell_rng(seed, ki, 0);
            std::mt19937_64 rng_cond = cell_rng(seed, ki, 1);
            std::mt19937_64 rng_control = cell_rng(seed, ki, 2);

            DependenceCell cell;
            cell.sample_size = k;
            cell.seed = seed;

            double residual = 0.0;
            bool converged = true;

            if (direction == SplitDirection::MixtureForward) {
                // Sample 1: the cause marginal alone -> mixture parameters.
                std::vector<double> ys;
                ys.reserve(static_cast<std::size_t>(k));
                for (long i = 0; i < k; ++i) {
                    ys.push_back(sample_gauss_mixture(mixture, 1, rng_input)[0].second);
                }
                const MixtureFit mfit = fit_gauss_mixture_mle(ys);
                converged = converged && mfit.converged;

                // The conditional used for sample 2: the anti-causal map of
                // the truth, or a fresh draw under the control.
                Eigen::Vector2d eta_used = anticausal(mixture);
                if (options.independence_control) {
                    std::uniform_real_distribution<double> da(-2.0, 2.0);
                    std::uniform_real_distribution<double> db(-1.0, 1.0);
                    eta_used(0) += da(rng_control);
                    eta_used(1) *= std::exp(db(rng_control));
                }

                // Sample 2: modified input marginal x fixed conditional.
                const GaussMixtureModel modified(modified_input_param, mixture.nu0, mixture.nu1,
                                                 mixture.rho);
                std::vector<std::pair<double, double>> pairs;
                pairs.reserve(static_cast<std::size_t>(k));
                std::uniform_real_distribution<double> unif(0.0, 1.0);
                for (long i = 0; i < k; ++i) {
                    const double y = sample_gauss_mixture(modified, 1, rng_cond)[0].second;
                    const double p1 =
                        sigmoid_stable(-(eta_used(0) * y + std::log(eta_used(1))));
                    const double x = unif(rng_cond) < p1 ? 1.0 : 0.0;
                    pairs.emplace_back(x, y);
                }
                const LogisticFit lfit = fit_inverse_logistic_mle(pairs);
                converged = converged && lfit.converged;

                const Eigen::Vector2d mapped = anticausal(mfit.model);
                residual = (mapped - Eigen::Vector2d(lfit.alpha, lfit.beta)).norm();
            } else {
                // Sample 1: the cause marginal alone -> response frequency.
                std::bernoulli_distribution cause(theta_star);
                long ones = 0;
                for (long i = 0; i < k; ++i) {
                    ones += cause(rng_input) ? 1 : 0;
                }
                double theta_hat = static_cast<double>(ones) / static_cast<double>(k);
                theta_hat = std::min(std::max(theta_hat, 1e-12), 1.0 - 1e-12);

                Eigen::Vector4d eta_used = eta_star;
                if (options.independence_control) {
                    std::uniform_real_distribution<double> ds(-0.3, 0.3);
                    std::uniform_real_distribution<double> dm(-1.0, 1.0);
                    eta_used(0) *= std::exp(ds(rng_control));
                    eta_used(1) += dm(rng_control);
                    eta_used(2) += dm(rng_control);
                    eta_used(3) += dm(rng_control);
                }

                // Sample 2: modified cause frequency x fixed conditional.
                std::bernoulli_distribution modified(modified_input_param);
                std::vector<std::pair<double, double>> pairs;
                pairs.reserve(static_cast<std::size_t>(k));
                for (long i = 0; i < k; ++i) {
                    const bool on = modified(rng_cond);
                    const double y = sample_sigmoid_response(eta_used, on, rng_cond);
                    pairs.emplace_back(on ? 1.0 : 0.0, y);
                }
                const SigmoidConditionalFit cfit = fit_sigmoid_conditional_mle(pairs, response_grid);
                converged = converged && cfit.converged;

                const double mapped = marginal_response_probability(cfit.eta, response_grid);
                residual = std::abs(mapped - theta_hat);
            }

            cell.residual = residual;
            cell.proxy_bits = -std::log2(std::max(residual, 1e-300));
            cell.converged = converged;
            report.cells.push_back(cell);
            residuals.push_back(cell.residual);
            proxies.push_back(cell.proxy_bits);
        }
        report.median_residuals.push_back(median_of(residuals));
        report.median_proxy_bits.push_back(median_of(proxies));
    }

    std::vector<double> log2k;
    log2k.reserve(report.sample_sizes.size());
    for (long k : report.sample_sizes) {
        log2k.push_back(std::log2(static_cast<double>(k)));
    }
    report.fitted_slope = report.sample_sizes.size() >= 2
                              ? regression_slope(log2k, report.median_proxy_bits)
                              : 0.0;
    return report;
}

}  // namespace

DependenceReport split_sample_experiment(SplitDirection direction,
                                         const GaussMixtureModel& mixture_truth,
                                         double modified_input_param,
                                         const SplitSampleOptions& options) {
    if (direction != SplitDirection::MixtureForward) {
        throw std::invalid_argument(
            "split_sample_experiment: a mixture truth drives the mixture-forward "
            "direction; pass a response model for sigmoid-forward");
    }
    if (!(modified_input_param > 0.0) || !(modified_input_param < 1.0)) {
        throw std::invalid_argument(
            "split_sample_experiment: the modified mixing weight must lie strictly "
            "between 0 and 1");
    }
    return run_split_sample(direction, mixture_truth, Eigen::Vector4d::Zero(), 0.0,
                            modified_input_param, options);
}

DependenceReport split_sample_experiment(SplitDirection direction,
                                         const GaussSigmoidModel& sigmoid_truth,
                                         double modified_input_param,
                                         const SplitSampleOptions& options) {
    if (direction != SplitDirection::SigmoidForward) {
        throw std::invalid_argument(
            "split_sample_experiment: a response truth drives the sigmoid-forward "
            "direction; pass a mixture model for mixture-forward");
    }
    if (!(modified_input_param > 0.0) || !(modified_input_param < 1.0)) {
        throw std::invalid_argument(
            "split_sample_experiment: the modified response frequency must lie "
            "strictly between 0 and 1");
    }
    const Eigen::Vector4d eta_star = response_family_params(sigmoid_truth);
    TruncationSpec trunc;
    trunc.center = eta_star(1);
    trunc.half_width = kDefaultTruncationSigmas * eta_star(0) + 2.0;
    const QuadratureGrid grid =
        build_grid(ValueDomain::full_real(), kDefaultGridResolution, trunc);
    const double theta_star = marginal_response_probability(eta_star, grid);
    const GaussMixtureModel dummy(0.5, -1.0, 1.0, 1.0);
    return run_split_sample(direction, dummy, eta_star, theta_star, modified_input_param,
                            options);
}

std::string dependence_report_to_json(const DependenceReport& report, int indent) {
    nlohmann::json j;
    j["sample_sizes"] = report.sample_sizes;
    j["median_residuals"] = report.median_residuals;
    j["median_proxy_bits"] = report.median_proxy_bits;
    j["fitted_slope"] = report.fitted_slope;
    j["independence_control"] = report.independence_control;
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : report.cells) {
        cells.push_back({{"sample_size", c.sample_size},
                         {"seed", c.seed},
                         {"residual", c.residual},
                         {"proxy_bits", c.proxy_bits},
                         {"converged", c.converged}});
    }
    j["cells"] = cells;
    return j.dump(indent);
}

std::string dependence_report_to_csv(const DependenceReport& report) {
    std::ostringstream out;
    out << "sample_size,seed,residual,proxy_bits,converged\n";
    char buf[64];
    for (const auto& c : report.cells) {
        out << c.sample_size << ',' << c.seed << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", c.residual);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", c.proxy_bits);
        out << buf << ',' << (c.converged ? "true" : "false") << '\n';
    }
    return out.str();
}

}  // namespace secord
