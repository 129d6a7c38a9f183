#include "secord/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace secord {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::MatrixXd row_points(const std::vector<double>& values) {
    Eigen::MatrixXd m(1, static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = values[i];
    return m;
}

}  // namespace

const char* to_string(DomainKind kind) {
    switch (kind) {
        case DomainKind::Binary: return "binary";
        case DomainKind::FiniteSet: return "finite-set";
        case DomainKind::IntegerRange: return "integer-range";
        case DomainKind::Interval: return "interval";
        case DomainKind::PositiveReal: return "positive-real";
        case DomainKind::FullReal: return "full-real";
        case DomainKind::Circle: return "circle";
    }
    return "unknown";
}

ValueDomain ValueDomain::binary() {
    ValueDomain d;
    d.kind_ = DomainKind::Binary;
    d.dimension_ = 1;
    d.points_ = row_points({0.0, 1.0});
    return d;
}

ValueDomain ValueDomain::binary_mapped(double zero_label, double one_label) {
    if (!(zero_label < one_label))
        throw std::invalid_argument("binary_mapped: labels must be distinct and ordered");
    ValueDomain d = binary();
    d.binary_labels_ = std::make_pair(zero_label, one_label);
    return d;
}

ValueDomain ValueDomain::finite_set(std::vector<double> points) {
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    if (points.size() < 2)
        throw std::invalid_argument("finite_set: need at least two distinct points");
    for (double p : points)
        if (!std::isfinite(p)) throw std::invalid_argument("finite_set: non-finite point");
    ValueDomain d;
    d.kind_ = DomainKind::FiniteSet;
    d.dimension_ = 1;
    d.points_ = row_points(points);
    return d;
}

ValueDomain ValueDomain::integer_range(long lower, long upper) {
    if (lower >= upper)
        throw std::invalid_argument("integer_range: need lower < upper");
    if (upper - lower > 1000000)
        throw std::invalid_argument("integer_range: range too wide to materialize");
    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(upper - lower + 1));
    for (long v = lower; v <= upper; ++v) pts.push_back(static_cast<double>(v));
    ValueDomain d;
    d.kind_ = DomainKind::IntegerRange;
    d.dimension_ = 1;
    d.points_ = row_points(pts);
    d.bounds_ = std::make_pair(static_cast<double>(lower), static_cast<double>(upper));
    return d;
}

ValueDomain ValueDomain::interval(double lower, double upper) {
    if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper))
        throw std::invalid_argument("interval: need finite lower < upper");
    ValueDomain d;
    d.kind_ = DomainKind::Interval;
    d.dimension_ = 1;
    d.bounds_ = std::make_pair(lower, upper);
    return d;
}

ValueDomain ValueDomain::positive_real(std::optional<std::pair<double, double>> observed) {
    ValueDomain d;
    d.kind_ = DomainKind::PositiveReal;
    d.dimension_ = 1;
    d.bounds_ = observed;
    return d;
}

ValueDomain ValueDomain::full_real(std::optional<std::pair<double, double>> observed) {
    ValueDomain d;
    d.kind_ = DomainKind::FullReal;
    d.dimension_ = 1;
    d.bounds_ = observed;
    return d;
}

ValueDomain ValueDomain::circle() {
    ValueDomain d;
    d.kind_ = DomainKind::Circle;
    d.dimension_ = 2;
    return d;
}

bool ValueDomain::operator==(const ValueDomain& other) const {
    if (kind_ != other.kind_ || dimension_ != other.dimension_) return false;
    if (points_.rows() != other.points_.rows() || points_.cols() != other.points_.cols())
        return false;
    if (points_.size() > 0 && points_ != other.points_) return false;
    return bounds_ == other.bounds_;
}

int QuadratureGrid::nearest_node(const Eigen::VectorXd& point) const {
    if (point.size() != nodes.rows())
        throw std::invalid_argument("nearest_node: point dimension mismatch");
    const int n = count();
    if (n == 0) throw std::invalid_argument("nearest_node: empty grid");
    int best = 0;
    double best_d = (nodes.col(0) - point).squaredNorm();
    for (int m = 1; m < n; ++m) {
        const double d = (nodes.col(m) - point).squaredNorm();
        if (d < best_d) { best_d = d; best = m; }
    }
    return best;
}

QuadratureGrid build_grid(const ValueDomain& domain, int resolution,
                          const TruncationSpec& truncation) {
    if (resolution < 2)
        throw std::invalid_argument("build_grid: resolution must be at least 2");

    QuadratureGrid grid;
    switch (domain.kind()) {
        case DomainKind::Binary:
        case DomainKind::FiniteSet:
        case DomainKind::IntegerRange: {
            grid.nodes = domain.points();
            grid.weights = Eigen::VectorXd::Ones(domain.points().cols());
            return grid;
        }
        case DomainKind::Interval: {
            const auto [lo, hi] = *domain.bounds();
            const double h = (hi - lo) / resolution;
            grid.nodes.resize(1, resolution);
            for (int m = 0; m < resolution; ++m) grid.nodes(0, m) = lo + h * (m + 0.5);
            grid.weights = Eigen::VectorXd::Constant(resolution, h);
            return grid;
        }
        case DomainKind::PositiveReal:
        case DomainKind::FullReal: {
            if (!(truncation.half_width > 0.0) || !std::isfinite(truncation.half_width) ||
                !std::isfinite(truncation.center))
                throw std::invalid_argument(
                    "build_grid: unbounded domain needs a truncation window with positive half-width");
            double lo = truncation.center - truncation.half_width;
            const double hi = truncation.center + truncation.half_width;
            if (domain.kind() == DomainKind::PositiveReal) lo = std::max(lo, 0.0);
            if (!(lo < hi))
                throw std::invalid_argument("build_grid: truncated range is empty");
            const double h = (hi - lo) / resolution;
            grid.nodes.resize(1, resolution);
            for (int m = 0; m < resolution; ++m) grid.nodes(0, m) = lo + h * (m + 0.5);
            grid.weights = Eigen::VectorXd::Constant(resolution, h);
            return grid;
        }
        case DomainKind::Circle: {
            grid.nodes.resize(2, resolution);
            for (int m = 0; m < resolution; ++m) {
                const double phi = kTwoPi * m / resolution;
                grid.nodes(0, m) = std::cos(phi);
                grid.nodes(1, m) = std::sin(phi);
            }
            grid.weights = Eigen::VectorXd::Constant(resolution, kTwoPi / resolution);
            return grid;
        }
    }
    throw std::logic_error("build_grid: unhandled domain kind");
}

TruncationSpec truncation_from_data(const std::vector<double>& column, double sigmas) {
    if (column.empty())
        throw std::invalid_argument("truncation_from_data: empty column");
    double mean = 0.0;
    for (double v : column) mean += v;
    mean /= static_cast<double>(column.size());
    double var = 0.0;
    for (double v : column) var += (v - mean) * (v - mean);
    var /= static_cast<double>(column.size());
    return TruncationSpec{mean, sigmas * std::sqrt(var)};
}

ValueDomain infer_domain(const std::vector<double>& column, const DomainHints& hints) {
    if (column.empty())
        throw std::invalid_argument("infer_domain: empty column");
    for (std::size_t i = 0; i < column.size(); ++i) {
        if (!std::isfinite(column[i])) {
            std::stringstream msg;
            msg << "infer_domain: non-finite value at row " << i;
            throw std::invalid_argument(msg.str());
        }
    }

    std::set<double> distinct(column.begin(), column.end());
    if (distinct.size() < 2)
        throw std::invalid_argument("infer_domain: column is constant");

    if (distinct.size() == 2) {
        auto it = distinct.begin();
        const double lo = *it++;
        const double hi = *it;
        return ValueDomain::binary_mapped(lo, hi);
    }

    const bool all_integral = std::all_of(column.begin(), column.end(), [](double v) {
        return std::floor(v) == v && std::abs(v) < 9.0e15;
    });
    if (all_integral && distinct.size() <= static_cast<std::size_t>(hints.max_discrete)) {
        return ValueDomain::integer_range(static_cast<long>(*distinct.begin()),
                                          static_cast<long>(*distinct.rbegin()));
    }

    const double lo = *distinct.begin();
    const double hi = *distinct.rbegin();
    const double pad = hints.pad_fraction * (hi - lo);
    if (hints.allow_positive && lo >= 0.0)
        return ValueDomain::positive_real(std::make_pair(std::max(0.0, lo - pad), hi + pad));
    return ValueDomain::full_real(std::make_pair(lo - pad, hi + pad));
}

std::vector<double> canonicalize(const ValueDomain& domain, const std::vector<double>& column) {
    if (domain.kind() != DomainKind::Binary || !domain.binary_labels()) return column;
    const auto [zero_label, one_label] = *domain.binary_labels();
    std::vector<double> out;
    out.reserve(column.size());
    for (std::size_t i = 0; i < column.size(); ++i) {
        const double v = column[i];
        if (v == zero_label) {
            out.push_back(0.0);
        } else if (v == one_label) {
            out.push_back(1.0);
        } else {
            std::stringstream msg;
            msg << "canonicalize: value " << v << " at row " << i
                << " is not one of the binary labels (" << zero_label << ", " << one_label << ")";
            throw std::invalid_argument(msg.str());
        }
    }
    return out;
}

BinnedColumn bin_column(const std::vector<double>& column, int n_bins) {
    if (n_bins < 2) throw std::invalid_argument("bin_column: need at least 2 bins");
    if (column.empty()) throw std::invalid_argument("bin_column: empty column");
    for (std::size_t i = 0; i < column.size(); ++i) {
        if (!std::isfinite(column[i])) {
            std::stringstream msg;
            msg << "bin_column: non-finite value at row " << i;
            throw std::invalid_argument(msg.str());
        }
    }
    const auto [lo_it, hi_it] = std::minmax_element(column.begin(), column.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(lo < hi)) throw std::invalid_argument("bin_column: column is constant");

    const double width = (hi - lo) / n_bins;
    std::vector<double> midpoints(static_cast<std::size_t>(n_bins));
    for (int b = 0; b < n_bins; ++b) midpoints[static_cast<std::size_t>(b)] = lo + width * (b + 0.5);

    BinnedColumn out;
    out.values.reserve(column.size());
    for (double v : column) {
        // Bins are left-open/right-closed, so a value sitting exactly on a
        // shared edge belongs to the lower bin; the minimum is clamped into
        // the first bin and the maximum lands in the last.
        int b = static_cast<int>(std::ceil((v - lo) / width)) - 1;
        b = std::clamp(b, 0, n_bins - 1);
        out.values.push_back(midpoints[static_cast<std::size_t>(b)]);
    }
    out.domain = ValueDomain::finite_set(midpoints);
    return out;
}

}  // namespace secord
