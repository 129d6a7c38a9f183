#pragma once

#include <Eigen/Dense>

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "secord/domain.hpp"
#include "secord/fit.hpp"

namespace secord {

/// How to interpret one CSV column when preparing a dataset.
enum class ColumnRole {
    Auto,          // infer from the values
    Binary,        // exactly two distinct values, mapped to {0, 1}
    FiniteSet,     // the distinct values observed
    IntegerRange,  // consecutive integers between the observed min and max
    Interval,      // bounded continuum (bounds from the hint or padded data)
    PositiveReal,  // half-line
    FullReal,      // unbounded line
    CircleAngle,   // periodic value, rescaled to [0, 2 pi)
    CirclePair,    // (cosine, sine) column pair folded into one angle
};

struct ColumnHint {
    ColumnRole role = ColumnRole::Auto;
    /// Equal-width bin count for continuum columns; 0 leaves them unbinned.
    int bins = 0;
    /// Period of a CircleAngle column.
    double period = 6.283185307179586476925286766559;
    /// CirclePair only: name of the companion sine column (the hinted column
    /// holds the cosine and keeps its name; the companion is consumed).
    std::string pair_column;
    /// Interval only: explicit bounds.  NaN falls back to padded data bounds.
    double lower = std::numeric_limits<double>::quiet_NaN();
    double upper = std::numeric_limits<double>::quiet_NaN();
};

struct CsvOptions {
    char delimiter = ',';
    bool has_header = true;
    /// Lines starting with this character are skipped ('\0' disables).
    char comment = '#';
};

struct DatasetVariable {
    std::string name;
    ValueDomain domain;
    Eigen::MatrixXd values;  // dimension x rows
};

struct Dataset {
    std::vector<DatasetVariable> variables;
    long row_count = 0;

    int variable_count() const { return static_cast<int>(variables.size()); }
    /// Index of the named variable; throws std::invalid_argument if absent.
    int index_of(const std::string& name) const;
    const DatasetVariable& variable(const std::string& name) const;
};

/// Parse a delimited numeric text file.  Columns come back with inferred
/// domains (see infer_domain); errors name the offending row and column.
Dataset load_csv(const std::string& path, const CsvOptions& options = {});
/// Same, from an in-memory string (used by tests and stdin handling).
Dataset load_csv_text(const std::string& text, const CsvOptions& options = {},
                      const std::string& origin = "<text>");

/// Apply column hints: role overrides, circle folding, and equal-width
/// binning of continuum columns.  Columns that already carry a finite-kind
/// domain pass through binning untouched, so preparing twice with the same
/// hints is a no-op.  Hints naming absent columns raise errors.
Dataset prepare(const Dataset& raw, const std::map<std::string, ColumnHint>& hints = {},
                const DomainHints& inference = {});

/// Write one-dimensional variables back to CSV with full round-trip
/// precision (%.17g).
void save_csv(const Dataset& data, const std::string& path, const CsvOptions& options = {});

/// Per-variable JSON summary: name, domain kind, rows, and either the
/// distinct support size (finite kinds) or min/mean/max/stddev.
std::string dataset_summary_json(const Dataset& data, int indent = -1);

/// Bridge into the fitting layer: snap every variable onto its quadrature
/// grid and assemble the shared fit context.
FitContext make_fit_context(const Dataset& data, const GridOptions& grid = {});

}  // namespace secord
