#include "secord/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "secord/mathutil.hpp"

namespace secord {

namespace {

void check_parent_values(const SecondOrderConditional& kernel,
                         const std::vector<Eigen::VectorXd>& parent_values) {
    if (parent_values.size() != kernel.beta_parents.size()) {
        std::stringstream msg;
        msg << "kernel for variable " << kernel.child_index << ": expected "
            << kernel.beta_parents.size() << " parent values, got " << parent_values.size();
        throw std::invalid_argument(msg.str());
    }
    for (std::size_t i = 0; i < parent_values.size(); ++i) {
        if (parent_values[i].size() != kernel.beta_parents[i].cols()) {
            std::stringstream msg;
            msg << "kernel for variable " << kernel.child_index << ": parent " << i
                << " has dimension " << parent_values[i].size() << ", expected "
                << kernel.beta_parents[i].cols();
            throw std::invalid_argument(msg.str());
        }
    }
}

/// alpha + sum_i beta_parents[i] * parent_i: the effective linear
/// coefficient on the child for a fixed parent assignment.
Eigen::VectorXd effective_linear(const SecondOrderConditional& kernel,
                                 const std::vector<Eigen::VectorXd>& parent_values) {
    Eigen::VectorXd lin = kernel.alpha;
    for (std::size_t i = 0; i < parent_values.size(); ++i)
        lin += kernel.beta_parents[i] * parent_values[i];
    return lin;
}

/// Exponent at every grid node for a fixed parent assignment.
Eigen::VectorXd node_exponents(const SecondOrderConditional& kernel,
                               const std::vector<Eigen::VectorXd>& parent_values) {
    const Eigen::MatrixXd& nodes = kernel.grid.nodes;
    const Eigen::VectorXd lin = effective_linear(kernel, parent_values);
    Eigen::VectorXd ex = nodes.transpose() * lin;
    ex += (nodes.array() * (kernel.beta_self * nodes).array())
              .colwise().sum().matrix().transpose();
    return ex;
}

double partition_from_exponents(const SecondOrderConditional& kernel,
                                const Eigen::VectorXd& ex) {
    for (Eigen::Index m = 0; m < ex.size(); ++m) {
        if (!std::isfinite(ex[m])) {
            std::stringstream msg;
            msg << "log_partition overflow in kernel for variable " << kernel.child_index
                << ": exponent is non-finite at grid node " << m;
            throw std::runtime_error(msg.str());
        }
    }
    const double z = log_sum_exp_weighted(ex, kernel.grid.weights);
    if (!std::isfinite(z)) {
        std::stringstream msg;
        msg << "log_partition overflow in kernel for variable " << kernel.child_index;
        throw std::runtime_error(msg.str());
    }
    return z;
}

}  // namespace

SecondOrderConditional make_kernel(int child_index, std::vector<int> parent_indices,
                                   Eigen::VectorXd alpha, Eigen::MatrixXd beta_self,
                                   std::vector<Eigen::MatrixXd> beta_parents,
                                   const ValueDomain& child_domain, int resolution,
                                   const TruncationSpec& truncation) {
    const int d = child_domain.dimension();
    if (alpha.size() != d)
        throw std::invalid_argument("make_kernel: alpha dimension does not match the child domain");
    if (beta_self.rows() != d || beta_self.cols() != d)
        throw std::invalid_argument("make_kernel: beta_self must be child-dim square");
    if (beta_parents.size() != parent_indices.size())
        throw std::invalid_argument("make_kernel: one beta matrix per parent required");
    for (const auto& b : beta_parents)
        if (b.rows() != d)
            throw std::invalid_argument("make_kernel: beta_parents rows must match the child dimension");

    SecondOrderConditional k;
    k.child_index = child_index;
    k.parent_indices = std::move(parent_indices);
    k.alpha = std::move(alpha);
    k.beta_self = 0.5 * (beta_self + beta_self.transpose());
    k.beta_parents = std::move(beta_parents);
    k.child_domain = child_domain;
    k.grid = build_grid(child_domain, resolution, truncation);
    k.grid_resolution = resolution;
    k.grid_truncation = truncation;
    return k;
}

double exponent(const SecondOrderConditional& kernel, const Eigen::VectorXd& x_child,
                const std::vector<Eigen::VectorXd>& parent_values) {
    if (x_child.size() != kernel.alpha.size()) {
        std::stringstream msg;
        msg << "kernel for variable " << kernel.child_index << ": child value has dimension "
            << x_child.size() << ", expected " << kernel.alpha.size();
        throw std::invalid_argument(msg.str());
    }
    check_parent_values(kernel, parent_values);
    const Eigen::VectorXd lin = effective_linear(kernel, parent_values);
    return lin.dot(x_child) + x_child.dot(kernel.beta_self * x_child);
}

double log_partition(const SecondOrderConditional& kernel,
                     const std::vector<Eigen::VectorXd>& parent_values) {
    check_parent_values(kernel, parent_values);
    return partition_from_exponents(kernel, node_exponents(kernel, parent_values));
}

double log_density(const SecondOrderConditional& kernel, const Eigen::VectorXd& x_child,
                   const std::vector<Eigen::VectorXd>& parent_values) {
    return exponent(kernel, x_child, parent_values) - log_partition(kernel, parent_values);
}

KernelMoments moments(const SecondOrderConditional& kernel,
                      const std::vector<Eigen::VectorXd>& parent_values) {
    check_parent_values(kernel, parent_values);
    const Eigen::MatrixXd& nodes = kernel.grid.nodes;
    const Eigen::VectorXd ex = node_exponents(kernel, parent_values);
    const double z = partition_from_exponents(kernel, ex);

    Eigen::VectorXd prob =
        (ex.array() - z).exp().matrix().cwiseProduct(kernel.grid.weights);
    KernelMoments m;
    m.mean = nodes * prob;
    m.second = nodes * prob.asDiagonal() * nodes.transpose();
    m.cross.reserve(parent_values.size());
    for (const auto& pv : parent_values) m.cross.push_back(m.mean * pv.transpose());
    return m;
}

Eigen::VectorXd sample(const SecondOrderConditional& kernel,
                       const std::vector<Eigen::VectorXd>& parent_values,
                       std::mt19937_64& rng) {
    check_parent_values(kernel, parent_values);
    const Eigen::VectorXd ex = node_exponents(kernel, parent_values);
    const double z = partition_from_exponents(kernel, ex);
    Eigen::VectorXd prob =
        (ex.array() - z).exp().matrix().cwiseProduct(kernel.grid.weights);

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng) * prob.sum();
    double acc = 0.0;
    for (int m = 0; m < kernel.grid.count(); ++m) {
        acc += prob[m];
        if (u <= acc) return kernel.grid.nodes.col(m);
    }
    return kernel.grid.nodes.col(kernel.grid.count() - 1);
}

double joint_log_density(const JointModel& model, const std::vector<Eigen::VectorXd>& row) {
    if (model.ordering.size() != model.kernels.size())
        throw std::invalid_argument("joint_log_density: ordering/kernel length mismatch");
    double total = 0.0;
    for (const auto& kernel : model.kernels) {
        std::vector<Eigen::VectorXd> parents;
        parents.reserve(kernel.parent_indices.size());
        for (int pid : kernel.parent_indices) {
            if (pid < 0 || static_cast<std::size_t>(pid) >= row.size())
                throw std::invalid_argument("joint_log_density: row is missing a parent value");
            parents.push_back(row[static_cast<std::size_t>(pid)]);
        }
        total += log_density(kernel, row.at(static_cast<std::size_t>(kernel.child_index)), parents);
    }
    return total;
}

// ---------------------------------------------------------------------------
// JSON serialization

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) return Eigen::MatrixXd(0, 0);
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j.at(r).size()) != cols)
            throw std::invalid_argument("matrix_from_json: ragged rows");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j.at(i).get<double>();
    return v;
}

json domain_to_json(const ValueDomain& d) {
    json out;
    out["kind"] = to_string(d.kind());
    switch (d.kind()) {
        case DomainKind::Binary:
            if (d.binary_labels())
                out["labels"] = {d.binary_labels()->first, d.binary_labels()->second};
            break;
        case DomainKind::FiniteSet: {
            json pts = json::array();
            for (Eigen::Index c = 0; c < d.points().cols(); ++c) pts.push_back(d.points()(0, c));
            out["points"] = std::move(pts);
            break;
        }
        case DomainKind::IntegerRange:
            out["lower"] = static_cast<long>(d.bounds()->first);
            out["upper"] = static_cast<long>(d.bounds()->second);
            break;
        case DomainKind::Interval:
            out["lower"] = d.bounds()->first;
            out["upper"] = d.bounds()->second;
            break;
        case DomainKind::PositiveReal:
        case DomainKind::FullReal:
            if (d.bounds()) out["observed"] = {d.bounds()->first, d.bounds()->second};
            break;
        case DomainKind::Circle:
            break;
    }
    return out;
}

ValueDomain domain_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "binary") {
        if (j.contains("labels"))
            return ValueDomain::binary_mapped(j["labels"].at(0).get<double>(),
                                              j["labels"].at(1).get<double>());
        return ValueDomain::binary();
    }
    if (kind == "finite-set") {
        std::vector<double> pts = j.at("points").get<std::vector<double>>();
        return ValueDomain::finite_set(std::move(pts));
    }
    if (kind == "integer-range")
        return ValueDomain::integer_range(j.at("lower").get<long>(), j.at("upper").get<long>());
    if (kind == "interval")
        return ValueDomain::interval(j.at("lower").get<double>(), j.at("upper").get<double>());
    if (kind == "positive-real" || kind == "full-real") {
        std::optional<std::pair<double, double>> observed;
        if (j.contains("observed"))
            observed = std::make_pair(j["observed"].at(0).get<double>(),
                                      j["observed"].at(1).get<double>());
        return kind == "positive-real" ? ValueDomain::positive_real(observed)
                                       : ValueDomain::full_real(observed);
    }
    if (kind == "circle") return ValueDomain::circle();
    throw std::invalid_argument("domain_from_json: unknown kind '" + kind + "'");
}

json kernel_to_json_obj(const SecondOrderConditional& k) {
    json out;
    out["child"] = k.child_index;
    out["parents"] = k.parent_indices;
    out["alpha"] = vector_to_json(k.alpha);
    out["beta_self"] = matrix_to_json(k.beta_self);
    json betas = json::array();
    for (const auto& b : k.beta_parents) betas.push_back(matrix_to_json(b));
    out["beta_parents"] = std::move(betas);
    out["domain"] = domain_to_json(k.child_domain);
    out["grid"] = {{"resolution", k.grid_resolution},
                   {"truncation", {{"center", k.grid_truncation.center},
                                   {"half_width", k.grid_truncation.half_width}}}};
    return out;
}

SecondOrderConditional kernel_from_json_obj(const json& j) {
    std::vector<Eigen::MatrixXd> betas;
    for (const auto& b : j.at("beta_parents")) betas.push_back(matrix_from_json(b));
    TruncationSpec trunc{j.at("grid").at("truncation").at("center").get<double>(),
                         j.at("grid").at("truncation").at("half_width").get<double>()};
    return make_kernel(j.at("child").get<int>(), j.at("parents").get<std::vector<int>>(),
                       vector_from_json(j.at("alpha")), matrix_from_json(j.at("beta_self")),
                       std::move(betas), domain_from_json(j.at("domain")),
                       j.at("grid").at("resolution").get<int>(), trunc);
}

}  // namespace

std::string kernel_to_json(const SecondOrderConditional& kernel, int indent) {
    return kernel_to_json_obj(kernel).dump(indent);
}

SecondOrderConditional kernel_from_json(const std::string& text) {
    return kernel_from_json_obj(json::parse(text));
}

std::string model_to_json(const JointModel& model, int indent) {
    json out;
    out["format"] = "secord-model";
    out["ordering"] = model.ordering;
    json kernels = json::array();
    for (const auto& k : model.kernels) kernels.push_back(kernel_to_json_obj(k));
    out["kernels"] = std::move(kernels);
    return out.dump(indent);
}

JointModel model_from_json(const std::string& text) {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "secord-model")
        throw std::invalid_argument("model_from_json: unrecognized document format");
    JointModel model;
    model.ordering = j.at("ordering").get<std::vector<int>>();
    for (const auto& k : j.at("kernels")) model.kernels.push_back(kernel_from_json_obj(k));
    if (model.ordering.size() != model.kernels.size())
        throw std::invalid_argument("model_from_json: ordering/kernel length mismatch");
    return model;
}

}  // namespace secord
