#include "secord/fit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "secord/mathutil.hpp"

namespace secord {

namespace {

/// Flat layout of the kernel parameters as one optimizer vector:
/// [alpha | beta_self lower triangle (column-major) | vec(beta_parent_i)...].
/// The matching sufficient statistic of an observation (x, parents) is
/// [x | x_r x_c with off-diagonal entries doubled | x_r * parent_i,c ...],
/// so that parameters . statistics reproduces the kernel exponent.
struct ParamLayout {
    int child_dim = 0;
    std::vector<int> parent_dims;
    int self_count = 0;
    int total = 0;

    explicit ParamLayout(int d, std::vector<int> pdims)
        : child_dim(d), parent_dims(std::move(pdims)) {
        self_count = d * (d + 1) / 2;
        total = d + self_count;
        for (int pd : parent_dims) total += d * pd;
    }

    void unpack(const Eigen::VectorXd& params, Eigen::VectorXd& alpha,
                Eigen::MatrixXd& beta_self, std::vector<Eigen::MatrixXd>& beta_parents) const {
        alpha = params.head(child_dim);
        beta_self.resize(child_dim, child_dim);
        int at = child_dim;
        for (int c = 0; c < child_dim; ++c)
            for (int r = c; r < child_dim; ++r) {
                beta_self(r, c) = params[at];
                beta_self(c, r) = params[at];
                ++at;
            }
        beta_parents.clear();
        for (int pd : parent_dims) {
            Eigen::MatrixXd b(child_dim, pd);
            for (int c = 0; c < pd; ++c)
                for (int r = 0; r < child_dim; ++r) b(r, c) = params[at++];
            beta_parents.push_back(std::move(b));
        }
    }

    /// Sufficient statistics of one observation; `stat` must have size total.
    void accumulate_stat(const Eigen::VectorXd& x,
                         const std::vector<Eigen::VectorXd>& parents, double w,
                         Eigen::VectorXd& stat) const {
        stat.head(child_dim) += w * x;
        int at = child_dim;
        for (int c = 0; c < child_dim; ++c)
            for (int r = c; r < child_dim; ++r)
                stat[at++] += w * (r == c ? x[r] * x[c] : 2.0 * x[r] * x[c]);
        for (std::size_t i = 0; i < parents.size(); ++i)
            for (int c = 0; c < parent_dims[i]; ++c)
                for (int r = 0; r < child_dim; ++r) stat[at++] += w * x[r] * parents[i][c];
    }

    /// Same aggregation applied to model moments instead of observations.
    void accumulate_moment_stat(const KernelMoments& m,
                                const std::vector<Eigen::VectorXd>& parents, double w,
                                Eigen::VectorXd& stat) const {
        stat.head(child_dim) += w * m.mean;
        int at = child_dim;
        for (int c = 0; c < child_dim; ++c)
            for (int r = c; r < child_dim; ++r)
                stat[at++] += w * (r == c ? m.second(r, c) : 2.0 * m.second(r, c));
        for (std::size_t i = 0; i < parents.size(); ++i)
            for (int c = 0; c < parent_dims[i]; ++c)
                for (int r = 0; r < child_dim; ++r) stat[at++] += w * m.cross[i](r, c);
    }
};

/// Rows collapsed to distinct parent assignments: the conditional NLL and
/// its gradient only need one partition-function evaluation per group.
struct ParentGroup {
    std::vector<Eigen::VectorXd> values;  // one vector per parent
    double weight = 0.0;                  // fraction of rows
};

}  // namespace

FitContext make_fit_context(std::vector<Eigen::MatrixXd> columns,
                            std::vector<ValueDomain> domains,
                            std::vector<std::string> names, const GridOptions& grid) {
    if (columns.size() != domains.size())
        throw std::invalid_argument("make_fit_context: one domain per column required");
    if (columns.empty()) throw std::invalid_argument("make_fit_context: no columns");
    const long rows = static_cast<long>(columns[0].cols());
    if (rows == 0) throw std::invalid_argument("make_fit_context: empty dataset");

    FitContext ctx;
    ctx.grid_options = grid;
    ctx.row_count = rows;
    for (std::size_t v = 0; v < columns.size(); ++v) {
        if (static_cast<long>(columns[v].cols()) != rows)
            throw std::invalid_argument("make_fit_context: columns differ in length");
        if (columns[v].rows() != domains[v].dimension())
            throw std::invalid_argument("make_fit_context: column dimension does not match its domain");

        TruncationSpec trunc;
        if (domains[v].is_unbounded()) {
            std::vector<double> flat(columns[v].data(), columns[v].data() + columns[v].size());
            trunc = truncation_from_data(flat, grid.truncation_sigmas);
            if (!(trunc.half_width > 0.0)) {
                std::stringstream msg;
                msg << "make_fit_context: variable " << v
                    << " is constant; no truncation window can be derived";
                throw std::invalid_argument(msg.str());
            }
        }
        QuadratureGrid g = build_grid(domains[v], grid.resolution, trunc);

        std::vector<int> idx(static_cast<std::size_t>(rows));
        Eigen::MatrixXd snapped(columns[v].rows(), rows);
        for (long r = 0; r < rows; ++r) {
            const int m = g.nearest_node(columns[v].col(r));
            idx[static_cast<std::size_t>(r)] = m;
            snapped.col(r) = g.nodes.col(m);
        }
        ctx.domains.push_back(std::move(domains[v]));
        ctx.grids.push_back(std::move(g));
        ctx.truncations.push_back(trunc);
        ctx.values.push_back(std::move(snapped));
        ctx.node_index.push_back(std::move(idx));
        ctx.names.push_back(v < names.size() ? names[v] : "x" + std::to_string(v));
    }
    return ctx;
}

FitContext make_fit_context(const std::vector<std::vector<double>>& columns,
                            std::vector<std::string> names, const GridOptions& grid,
                            const DomainHints& hints) {
    std::vector<Eigen::MatrixXd> mats;
    std::vector<ValueDomain> domains;
    for (const auto& col : columns) {
        ValueDomain d = infer_domain(col, hints);
        std::vector<double> canon = canonicalize(d, col);
        Eigen::MatrixXd m(1, static_cast<Eigen::Index>(canon.size()));
        for (std::size_t i = 0; i < canon.size(); ++i)
            m(0, static_cast<Eigen::Index>(i)) = canon[i];
        mats.push_back(std::move(m));
        domains.push_back(std::move(d));
    }
    return make_fit_context(std::move(mats), std::move(domains), std::move(names), grid);
}

FitResult fit_conditional(const FitContext& data, int child, const std::vector<int>& parents,
                          const FitOptions& options) {
    const int nvars = data.variable_count();
    if (child < 0 || child >= nvars)
        throw std::invalid_argument("fit_conditional: child index out of range");
    for (int p : parents) {
        if (p < 0 || p >= nvars)
            throw std::invalid_argument("fit_conditional: parent index out of range");
        if (p == child)
            throw std::invalid_argument("fit_conditional: a variable cannot be its own parent");
    }
    const long rows = data.row_count;
    if (rows == 0) throw std::invalid_argument("fit_conditional: empty dataset");

    const ValueDomain& child_domain = data.domains[static_cast<std::size_t>(child)];
    const int d = child_domain.dimension();
    std::vector<int> parent_dims;
    for (int p : parents)
        parent_dims.push_back(data.domains[static_cast<std::size_t>(p)].dimension());
    const ParamLayout layout(d, parent_dims);

    // Collapse rows into distinct parent assignments, keyed by node indices.
    std::map<std::vector<int>, std::size_t> group_of;
    std::vector<ParentGroup> groups;
    std::vector<std::size_t> row_group(static_cast<std::size_t>(rows));
    std::vector<int> key(parents.size());
    for (long r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < parents.size(); ++i)
            key[i] = data.node_index[static_cast<std::size_t>(parents[i])][static_cast<std::size_t>(r)];
        auto [it, inserted] = group_of.try_emplace(key, groups.size());
        if (inserted) {
            ParentGroup g;
            for (std::size_t i = 0; i < parents.size(); ++i)
                g.values.push_back(data.values[static_cast<std::size_t>(parents[i])].col(r));
            groups.push_back(std::move(g));
        }
        groups[it->second].weight += 1.0;
        row_group[static_cast<std::size_t>(r)] = it->second;
    }
    for (auto& g : groups) g.weight /= static_cast<double>(rows);

    // Empirical sufficient statistics, averaged over rows.
    Eigen::VectorXd empirical = Eigen::VectorXd::Zero(layout.total);
    {
        const double w = 1.0 / static_cast<double>(rows);
        for (long r = 0; r < rows; ++r) {
            const ParentGroup& g = groups[row_group[static_cast<std::size_t>(r)]];
            layout.accumulate_stat(data.values[static_cast<std::size_t>(child)].col(r), g.values,
                                   w, empirical);
        }
    }

    // Working kernel re-used across objective evaluations.
    SecondOrderConditional kernel;
    kernel.child_index = child;
    kernel.parent_indices = parents;
    kernel.child_domain = child_domain;
    kernel.grid = data.grids[static_cast<std::size_t>(child)];
    kernel.grid_resolution = data.grid_options.resolution;
    kernel.grid_truncation = data.truncations[static_cast<std::size_t>(child)];

    auto objective = [&](const Eigen::VectorXd& params, Eigen::VectorXd& grad) -> double {
        layout.unpack(params, kernel.alpha, kernel.beta_self, kernel.beta_parents);
        grad = Eigen::VectorXd::Zero(layout.total) - empirical;
        double value = -params.dot(empirical);
        for (const auto& g : groups) {
            value += g.weight * log_partition(kernel, g.values);
            layout.accumulate_moment_stat(moments(kernel, g.values), g.values, g.weight, grad);
        }
        return value;
    };

    // Spectral cap on beta_self keeps unbounded-real kernels normalizable.
    BfgsProjection project = nullptr;
    if (child_domain.is_unbounded()) {
        project = [&layout, &options](Eigen::VectorXd& params) -> bool {
            Eigen::VectorXd alpha;
            Eigen::MatrixXd beta_self;
            std::vector<Eigen::MatrixXd> beta_parents;
            layout.unpack(params, alpha, beta_self, beta_parents);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(beta_self);
            if (es.eigenvalues().maxCoeff() <= options.beta_eigen_cap) return false;
            Eigen::VectorXd clamped = es.eigenvalues().cwiseMin(options.beta_eigen_cap);
            beta_self = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
            int at = layout.child_dim;
            for (int c = 0; c < layout.child_dim; ++c)
                for (int r = c; r < layout.child_dim; ++r) params[at++] = beta_self(r, c);
            return true;
        };
    }

    BfgsOptions bopts;
    bopts.max_iterations = options.max_iterations;
    bopts.gradient_tolerance = options.gradient_tolerance;
    bopts.armijo_c = options.armijo_c;
    bopts.backtrack_factor = options.backtrack_factor;
    bopts.record_history = options.record_objective_history;

    const BfgsResult opt =
        minimize_bfgs(objective, Eigen::VectorXd::Zero(layout.total), bopts, project);

    FitResult result;
    layout.unpack(opt.x, kernel.alpha, kernel.beta_self, kernel.beta_parents);
    result.kernel = kernel;
    result.nll_per_sample = opt.value;
    result.iterations = opt.iterations;
    result.converged = opt.converged;
    result.objective_history = opt.history;
    return result;
}

bool FittedOrderingModel::all_converged() const {
    return std::all_of(steps.begin(), steps.end(),
                       [](const FitResult& s) { return s.converged; });
}

JointModel FittedOrderingModel::model() const {
    JointModel m;
    m.ordering = ordering;
    for (const auto& s : steps) m.kernels.push_back(s.kernel);
    return m;
}

FittedOrderingModel fit_ordering(const FitContext& data, const std::vector<int>& ordering,
                                 const FitOptions& options) {
    if (ordering.empty()) throw std::invalid_argument("fit_ordering: empty ordering");
    std::vector<bool> seen(static_cast<std::size_t>(data.variable_count()), false);
    for (int v : ordering) {
        if (v < 0 || v >= data.variable_count())
            throw std::invalid_argument("fit_ordering: variable index out of range");
        if (seen[static_cast<std::size_t>(v)])
            throw std::invalid_argument("fit_ordering: duplicate variable in ordering");
        seen[static_cast<std::size_t>(v)] = true;
    }

    FittedOrderingModel fitted;
    fitted.ordering = ordering;
    std::vector<int> parents;
    for (int v : ordering) {
        fitted.steps.push_back(fit_conditional(data, v, parents, options));
        fitted.total_nll += fitted.steps.back().nll_per_sample;
        parents.push_back(v);
    }
    return fitted;
}

}  // namespace secord
