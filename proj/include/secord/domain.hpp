#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace secord {

/// The closed set of value-range shapes a variable may take.  Binary,
/// finite-set and integer-range values live on explicit point sets with
/// counting reference measure; interval / positive-real / full-real values
/// live on (possibly truncated) pieces of the line with length measure; the
/// circle is the unit circle in R^2 with arc-length measure (total 2*pi).
enum class DomainKind {
    Binary,
    FiniteSet,
    IntegerRange,
    Interval,
    PositiveReal,
    FullReal,
    Circle,
};

const char* to_string(DomainKind kind);

/// Integration window for unbounded kinds: the grid covers
/// [center - half_width, center + half_width] (clipped at 0 for
/// positive-real).  The stock choice is data mean +/- 8 standard deviations.
struct TruncationSpec {
    double center = 0.0;
    double half_width = 0.0;
};

/// Knobs for domain inference from a raw column.
struct DomainHints {
    /// Integral columns with at most this many distinct values become an
    /// integer range; beyond it they are treated as continuous.
    int max_discrete = 20;
    /// Observed-range padding recorded on inferred continuous domains.
    double pad_fraction = 0.05;
    /// Allow the nonnegative-column -> positive-real rule.
    bool allow_positive = true;
};

/// A variable's value set.  Construct through the factories, which validate
/// shape-specific invariants (finite kinds need >= 2 distinct points,
/// intervals need lower < upper, circle points are unit vectors).
class ValueDomain {
  public:
    static ValueDomain binary();
    /// Binary with remembered source labels (lower label -> 0, higher -> 1).
    static ValueDomain binary_mapped(double zero_label, double one_label);
    static ValueDomain finite_set(std::vector<double> points);
    static ValueDomain integer_range(long lower, long upper);
    static ValueDomain interval(double lower, double upper);
    static ValueDomain positive_real(std::optional<std::pair<double, double>> observed = {});
    static ValueDomain full_real(std::optional<std::pair<double, double>> observed = {});
    static ValueDomain circle();

    DomainKind kind() const { return kind_; }
    int dimension() const { return dimension_; }

    /// Point set for finite kinds, one column per point (ascending).
    const Eigen::MatrixXd& points() const { return points_; }
    /// Interval bounds, or the padded observed range recorded by inference
    /// for continuous kinds.
    const std::optional<std::pair<double, double>>& bounds() const { return bounds_; }
    /// Source labels of a remapped binary column ({zero_label, one_label}).
    const std::optional<std::pair<double, double>>& binary_labels() const { return binary_labels_; }

    bool is_finite_kind() const {
        return kind_ == DomainKind::Binary || kind_ == DomainKind::FiniteSet ||
               kind_ == DomainKind::IntegerRange;
    }
    bool is_unbounded() const {
        return kind_ == DomainKind::PositiveReal || kind_ == DomainKind::FullReal;
    }

    /// Structural equality: kind, dimension, point set and bounds.  Source
    /// labels are bookkeeping and deliberately excluded, so re-inferring a
    /// canonicalized column compares equal to the original inference.
    bool operator==(const ValueDomain& other) const;
    bool operator!=(const ValueDomain& other) const { return !(*this == other); }

    /// Default-constructs an unbounded full-real domain.
    ValueDomain() = default;

  private:
    DomainKind kind_ = DomainKind::FullReal;
    int dimension_ = 1;
    Eigen::MatrixXd points_;  // dimension x count, finite kinds only
    std::optional<std::pair<double, double>> bounds_;
    std::optional<std::pair<double, double>> binary_labels_;
};

/// Nodes and weights of a quadrature rule over a domain.  Integrals are
/// plain weighted sums: integral f ~= sum_m weights[m] * f(nodes.col(m)).
struct QuadratureGrid {
    Eigen::MatrixXd nodes;    // dimension x count
    Eigen::VectorXd weights;  // count

    int count() const { return static_cast<int>(weights.size()); }
    int dimension() const { return static_cast<int>(nodes.rows()); }
    double total_weight() const { return weights.sum(); }

    /// Index of the grid node closest to `point` (Euclidean; on the circle
    /// this is the closest angle).
    int nearest_node(const Eigen::VectorXd& point) const;
};

/// Build the quadrature rule for a domain.
///
/// Finite kinds use their point set with unit weights (resolution is
/// validated but otherwise ignored).  Interval domains get `resolution`
/// equal-width cells with midpoint nodes; unbounded kinds do the same over
/// the truncation window (clipped at 0 for positive-real); the circle gets
/// `resolution` equally spaced unit vectors, each weighted 2*pi/resolution.
///
/// Throws std::invalid_argument for resolution < 2 or a missing/empty
/// truncation window on an unbounded kind.
QuadratureGrid build_grid(const ValueDomain& domain, int resolution,
                          const TruncationSpec& truncation = {});

/// Default grid resolution for continuous kinds.
inline constexpr int kDefaultGridResolution = 512;
/// Default truncation half-width in standard deviations.
inline constexpr double kDefaultTruncationSigmas = 8.0;

/// Truncation window centered on the column mean with half-width
/// `sigmas` standard deviations.
TruncationSpec truncation_from_data(const std::vector<double>& column, double sigmas = kDefaultTruncationSigmas);

/// Classify a raw column: binary when exactly two distinct values occur,
/// integer-range when all values are integral with at most
/// hints.max_discrete distinct values, positive-real when all values are
/// >= 0 (and hints allow), full-real otherwise.  Circle domains are never
/// inferred; they must be declared explicitly.  Continuous results record
/// the observed range padded by hints.pad_fraction.
///
/// Throws std::invalid_argument on empty or constant columns and on
/// non-finite entries (naming the row index).
ValueDomain infer_domain(const std::vector<double>& column, const DomainHints& hints = {});

/// Remap a column onto the domain's canonical values (binary labels to
/// {0,1}; identity for every other kind).
std::vector<double> canonicalize(const ValueDomain& domain, const std::vector<double>& column);

struct BinnedColumn {
    std::vector<double> values;  // each entry replaced by its bin midpoint
    ValueDomain domain;          // finite set of all bin midpoints
};

/// Replace a continuous column by equal-width-bin midpoints over
/// [min, max]; the maximum falls in the last bin.  Throws on n_bins < 2,
/// empty or constant columns, and non-finite entries.
BinnedColumn bin_column(const std::vector<double>& column, int n_bins);

}  // namespace secord
