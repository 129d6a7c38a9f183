#include "secord/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace secord {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, delimiter)) {
        // Trim surrounding whitespace; values are plain numbers.
        const auto begin = field.find_first_not_of(" \t\r");
        const auto end = field.find_last_not_of(" \t\r");
        fields.push_back(begin == std::string::npos ? std::string()
                                                    : field.substr(begin, end - begin + 1));
    }
    if (!line.empty() && line.back() == delimiter) {
        fields.emplace_back();
    }
    return fields;
}

double parse_cell(const std::string& cell, long row, const std::string& column,
                  const std::string& origin) {
    if (cell.empty()) {
        std::ostringstream msg;
        msg << origin << ": empty cell at row " << row << ", column '" << column << "'";
        throw std::invalid_argument(msg.str());
    }
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(cell, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != cell.size()) {
        std::ostringstream msg;
        msg << origin << ": could not parse '" << cell << "' at row " << row << ", column '"
            << column << "'";
        throw std::invalid_argument(msg.str());
    }
    return value;
}

/// Fold an angle into [0, 2 pi).
double fold_angle(double angle) {
    double a = std::fmod(angle, kTwoPi);
    if (a < 0.0) {
        a += kTwoPi;
    }
    return a;
}

Eigen::MatrixXd to_row(const std::vector<double>& values) {
    Eigen::MatrixXd m(1, static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        m(0, static_cast<Eigen::Index>(i)) = values[i];
    }
    return m;
}

std::vector<double> to_std(const Eigen::VectorXd& column) {
    return std::vector<double>(column.data(), column.data() + column.size());
}

DatasetVariable infer_variable(std::string name, const std::vector<double>& column,
                               const DomainHints& inference) {
    DatasetVariable var;
    var.name = std::move(name);
    try {
        var.domain = infer_domain(column, inference);
        var.values = to_row(canonicalize(var.domain, column));
    } catch (const std::invalid_argument& err) {
        std::ostringstream msg;
        msg << "column '" << var.name << "': " << err.what();
        throw std::invalid_argument(msg.str());
    }
    return var;
}

}  // namespace

int Dataset::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (variables[i].name == name) {
            return static_cast<int>(i);
        }
    }
    std::ostringstream msg;
    msg << "dataset has no variable named '" << name << "'";
    throw std::invalid_argument(msg.str());
}

const DatasetVariable& Dataset::variable(const std::string& name) const {
    return variables[static_cast<std::size_t>(index_of(name))];
}

Dataset load_csv_text(const std::string& text, const CsvOptions& options,
                      const std::string& origin) {
    std::istringstream stream(text);
    std::string line;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    long row = 0;
    bool header_pending = options.has_header;

    while (std::getline(stream, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (options.comment != '\0' && line.front() == options.comment) {
            continue;
        }
        const std::vector<std::string> fields = split_line(line, options.delimiter);
        if (header_pending) {
            header_pending = false;
            std::set<std::string> seen;
            for (const std::string& f : fields) {
                if (f.empty()) {
                    throw std::invalid_argument(origin + ": header has an empty column name");
                }
                if (!seen.insert(f).second) {
                    throw std::invalid_argument(origin + ": duplicate column name '" + f + "'");
                }
                names.push_back(f);
            }
            columns.resize(names.size());
            continue;
        }
        if (names.empty()) {
            // Headerless file: synthesize names from the first data row.
            for (std::size_t i = 0; i < fields.size(); ++i) {
                names.push_back("c" + std::to_string(i));
            }
            columns.resize(names.size());
        }
        ++row;
        if (fields.size() != names.size()) {
            std::ostringstream msg;
            msg << origin << ": row " << row << " has " << fields.size() << " fields, expected "
                << names.size();
            throw std::invalid_argument(msg.str());
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            columns[c].push_back(parse_cell(fields[c], row, names[c], origin));
        }
    }
    if (names.empty() || row == 0) {
        throw std::invalid_argument(origin + ": no data rows");
    }

    Dataset data;
    data.row_count = row;
    DomainHints inference;
    for (std::size_t c = 0; c < names.size(); ++c) {
        data.variables.push_back(infer_variable(names[c], columns[c], inference));
    }
    return data;
}

Dataset load_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream file(path);
    if (!file) {
        throw std::runtime_error("could not open '" + path + "' for reading");
    }
    std::ostringstream content;
    content << file.rdbuf();
    return load_csv_text(content.str(), options, path);
}

Dataset prepare(const Dataset& raw, const std::map<std::string, ColumnHint>& hints,
                const DomainHints& inference) {
    // A circle hint on a column that is already folded (an earlier prepare
    // pass) is satisfied; its companion was consumed back then.
    auto already_folded = [&](const std::string& name, const ColumnHint& hint) {
        return (hint.role == ColumnRole::CircleAngle || hint.role == ColumnRole::CirclePair) &&
               raw.variables[static_cast<std::size_t>(raw.index_of(name))].domain.kind() ==
                   DomainKind::Circle;
    };

    for (const auto& [name, hint] : hints) {
        raw.index_of(name);  // throws with the column name when absent
        if (hint.role == ColumnRole::CirclePair && !already_folded(name, hint)) {
            if (hint.pair_column.empty()) {
                throw std::invalid_argument("column '" + name +
                                            "': CirclePair hint needs pair_column");
            }
            raw.index_of(hint.pair_column);
        }
    }

    // Columns consumed as the sine half of a pair disappear from the output.
    std::set<std::string> consumed;
    for (const auto& [name, hint] : hints) {
        if (hint.role == ColumnRole::CirclePair && !already_folded(name, hint)) {
            if (hint.pair_column == name) {
                throw std::invalid_argument("column '" + name +
                                            "': CirclePair cannot pair a column with itself");
            }
            consumed.insert(hint.pair_column);
        }
    }

    Dataset out;
    out.row_count = raw.row_count;
    for (const DatasetVariable& var : raw.variables) {
        if (consumed.count(var.name)) {
            continue;
        }
        const auto it = hints.find(var.name);
        ColumnHint hint = it == hints.end() ? ColumnHint{} : it->second;
        if (var.domain.kind() == DomainKind::Circle &&
            (hint.role == ColumnRole::CircleAngle || hint.role == ColumnRole::CirclePair)) {
            hint.role = ColumnRole::Auto;  // folded on an earlier pass
        }
        if (var.domain.kind() == DomainKind::Binary && hint.role == ColumnRole::Binary) {
            hint.role = ColumnRole::Auto;  // keeps the labels recorded when it was binarized
        }

        if (var.values.rows() != 1 && hint.role != ColumnRole::Auto) {
            throw std::invalid_argument("column '" + var.name +
                                        "': role hints apply to one-dimensional columns");
        }
        const std::vector<double> column =
            var.values.rows() == 1 ? to_std(var.values.row(0).transpose())
                                   : std::vector<double>();

        DatasetVariable prepared;
        prepared.name = var.name;
        try {
            switch (hint.role) {
                case ColumnRole::Auto:
                    prepared.domain = var.domain;
                    prepared.values = var.values;
                    break;
                case ColumnRole::Binary: {
                    const std::set<double> distinct(column.begin(), column.end());
                    if (distinct.size() != 2) {
                        std::ostringstream msg;
                        msg << "expected exactly 2 distinct values, found " << distinct.size();
                        throw std::invalid_argument(msg.str());
                    }
                    prepared.domain =
                        ValueDomain::binary_mapped(*distinct.begin(), *std::next(distinct.begin()));
                    prepared.values = to_row(canonicalize(prepared.domain, column));
                    break;
                }
                case ColumnRole::FiniteSet:
                    prepared.domain = ValueDomain::finite_set(column);
                    prepared.values = to_row(column);
                    break;
                case ColumnRole::IntegerRange: {
                    for (std::size_t i = 0; i < column.size(); ++i) {
                        if (std::floor(column[i]) != column[i]) {
                            std::ostringstream msg;
                            msg << "value " << column[i] << " at row " << (i + 1)
                                << " is not an integer";
                            throw std::invalid_argument(msg.str());
                        }
                    }
                    const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
                    prepared.domain = ValueDomain::integer_range(static_cast<long>(*lo),
                                                                 static_cast<long>(*hi));
                    prepared.values = to_row(column);
                    break;
                }
                case ColumnRole::Interval: {
                    const auto [vmin_it, vmax_it] = std::minmax_element(column.begin(), column.end());
                    const double vmin = *vmin_it;
                    const double vmax = *vmax_it;
                    double lo = hint.lower;
                    double hi = hint.upper;
                    if (std::isnan(lo) || std::isnan(hi)) {
                        const double pad = inference.pad_fraction * std::max(vmax - vmin, 1e-12);
                        if (std::isnan(lo)) {
                            lo = vmin - pad;
                        }
                        if (std::isnan(hi)) {
                            hi = vmax + pad;
                        }
                    }
                    if (vmin < lo || vmax > hi) {
                        throw std::invalid_argument("values fall outside the hinted interval");
                    }
                    prepared.domain = ValueDomain::interval(lo, hi);
                    prepared.values = to_row(column);
                    break;
                }
                case ColumnRole::PositiveReal:
                case ColumnRole::FullReal: {
                    const auto [vmin_it, vmax_it] = std::minmax_element(column.begin(), column.end());
                    const double pad = inference.pad_fraction * (*vmax_it - *vmin_it);
                    if (hint.role == ColumnRole::PositiveReal) {
                        if (*vmin_it < 0.0) {
                            throw std::invalid_argument(
                                "negative values in a positive-real column");
                        }
                        prepared.domain = ValueDomain::positive_real(
                            std::make_pair(std::max(0.0, *vmin_it - pad), *vmax_it + pad));
                    } else {
                        prepared.domain = ValueDomain::full_real(
                            std::make_pair(*vmin_it - pad, *vmax_it + pad));
                    }
                    prepared.values = to_row(column);
                    break;
                }
                case ColumnRole::CircleAngle: {
                    if (!(hint.period > 0.0)) {
                        throw std::invalid_argument("circle period must be positive");
                    }
                    prepared.domain = ValueDomain::circle();
                    prepared.values.resize(2, static_cast<Eigen::Index>(column.size()));
                    for (std::size_t i = 0; i < column.size(); ++i) {
                        const double angle = fold_angle(column[i] * kTwoPi / hint.period);
                        prepared.values(0, static_cast<Eigen::Index>(i)) = std::cos(angle);
                        prepared.values(1, static_cast<Eigen::Index>(i)) = std::sin(angle);
                    }
                    break;
                }
                case ColumnRole::CirclePair: {
                    const DatasetVariable& sine = raw.variable(hint.pair_column);
                    if (sine.values.rows() != 1) {
                        throw std::invalid_argument("pair column must be one-dimensional");
                    }
                    prepared.domain = ValueDomain::circle();
                    prepared.values.resize(2, static_cast<Eigen::Index>(column.size()));
                    for (std::size_t i = 0; i < column.size(); ++i) {
                        const double c = column[i];
                        const double s = sine.values(0, static_cast<Eigen::Index>(i));
                        const double magnitude = std::hypot(c, s);
                        if (magnitude < 1e-12) {
                            std::ostringstream msg;
                            msg << "(cos, sin) pair at row " << (i + 1)
                                << " has vanishing magnitude";
                            throw std::invalid_argument(msg.str());
                        }
                        prepared.values(0, static_cast<Eigen::Index>(i)) = c / magnitude;
                        prepared.values(1, static_cast<Eigen::Index>(i)) = s / magnitude;
                    }
                    break;
                }
            }

            // Optional binning, only for continuum domains; finite kinds pass
            // through so repeated preparation is idempotent.
            if (hint.bins > 0 && !prepared.domain.is_finite_kind() &&
                prepared.domain.kind() != DomainKind::Circle) {
                const BinnedColumn binned =
                    bin_column(to_std(prepared.values.row(0).transpose()), hint.bins);
                prepared.domain = binned.domain;
                prepared.values = to_row(binned.values);
            }
        } catch (const std::invalid_argument& err) {
            std::ostringstream msg;
            msg << "column '" << var.name << "': " << err.what();
            throw std::invalid_argument(msg.str());
        }

        out.variables.push_back(std::move(prepared));
    }
    return out;
}

void save_csv(const Dataset& data, const std::string& path, const CsvOptions& options) {
    for (const DatasetVariable& var : data.variables) {
        if (var.values.rows() != 1) {
            throw std::invalid_argument("save_csv: variable '" + var.name +
                                        "' is not one-dimensional");
        }
        if (var.values.cols() != data.row_count) {
            throw std::invalid_argument("save_csv: variable '" + var.name +
                                        "' disagrees with the dataset row count");
        }
    }
    std::ofstream file(path);
    if (!file) {
        throw std::runtime_error("could not open '" + path + "' for writing");
    }
    if (options.has_header) {
        for (std::size_t c = 0; c < data.variables.size(); ++c) {
            file << (c ? std::string(1, options.delimiter) : "") << data.variables[c].name;
        }
        file << '\n';
    }
    char buf[64];
    for (long r = 0; r < data.row_count; ++r) {
        for (std::size_t c = 0; c < data.variables.size(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", data.variables[c].values(0, r));
            file << (c ? std::string(1, options.delimiter) : "") << buf;
        }
        file << '\n';
    }
    if (!file) {
        throw std::runtime_error("failed while writing '" + path + "'");
    }
}

std::string dataset_summary_json(const Dataset& data, int indent) {
    nlohmann::json j;
    j["rows"] = data.row_count;
    nlohmann::json vars = nlohmann::json::array();
    for (const DatasetVariable& var : data.variables) {
        nlohmann::json v;
        v["name"] = var.name;
        v["kind"] = to_string(var.domain.kind());
        v["dimension"] = var.domain.dimension();
        if (var.domain.is_finite_kind()) {
            v["support_size"] = static_cast<long>(var.domain.points().cols());
        }
        if (var.values.rows() == 1 && var.values.cols() > 0) {
            const Eigen::VectorXd col = var.values.row(0).transpose();
            const double mean = col.mean();
            v["min"] = col.minCoeff();
            v["max"] = col.maxCoeff();
            v["mean"] = mean;
            v["stddev"] = std::sqrt((col.array() - mean).square().mean());
        }
        vars.push_back(v);
    }
    j["variables"] = vars;
    return j.dump(indent);
}

FitContext make_fit_context(const Dataset& data, const GridOptions& grid) {
    std::vector<Eigen::MatrixXd> columns;
    std::vector<ValueDomain> domains;
    std::vector<std::string> names;
    columns.reserve(data.variables.size());
    for (const DatasetVariable& var : data.variables) {
        columns.push_back(var.values);
        domains.push_back(var.domain);
        names.push_back(var.name);
    }
    return make_fit_context(columns, domains, names, grid);
}

}  // namespace secord
