// Command-line front end: causal-ordering inference, model simulation,
// information-rank diagnostics, and the logic-gate complexity demo.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "secord/closedform.hpp"
#include "secord/dataset.hpp"
#include "secord/fisher.hpp"
#include "secord/infer.hpp"
#include "secord/mathutil.hpp"
#include "secord/model.hpp"

namespace {

using nlohmann::json;

#ifndef SECORD_VERSION
#define SECORD_VERSION "0.0.0"
#endif

json tool_stamp() {
    return json{{"name", "secord"}, {"version", SECORD_VERSION}};
}

void emit(const std::string& text, const std::string& output_path) {
    if (output_path.empty() || output_path == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') {
            std::cout << '\n';
        }
        return;
    }
    std::ofstream file(output_path);
    if (!file) {
        throw std::runtime_error("could not open '" + output_path + "' for writing");
    }
    file << text;
    if (!text.empty() && text.back() != '\n') {
        file << '\n';
    }
    if (!file) {
        throw std::runtime_error("failed while writing '" + output_path + "'");
    }
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream stream(csv);
    while (std::getline(stream, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

secord::ColumnRole parse_role(const std::string& text, const std::string& column) {
    if (text == "auto") return secord::ColumnRole::Auto;
    if (text == "binary") return secord::ColumnRole::Binary;
    if (text == "finite") return secord::ColumnRole::FiniteSet;
    if (text == "integers") return secord::ColumnRole::IntegerRange;
    if (text == "interval") return secord::ColumnRole::Interval;
    if (text == "positive") return secord::ColumnRole::PositiveReal;
    if (text == "real") return secord::ColumnRole::FullReal;
    if (text == "circle") return secord::ColumnRole::CircleAngle;
    if (text == "circle-pair") return secord::ColumnRole::CirclePair;
    throw CLI::ValidationError("--domain", "unknown domain role '" + text + "' for column '" +
                                               column +
                                               "' (expected auto, binary, finite, integers, "
                                               "interval, positive, real, circle, circle-pair)");
}

// --- infer -------------------------------------------------------------------

struct InferArgs {
    std::string input;
    std::string columns_csv;
    std::vector<std::string> domain_specs;  // col=role[:extra]
    std::vector<std::string> bin_specs;     // col=N or N
    std::string replay_path;
    int grid_resolution = secord::kDefaultGridResolution;
    double trunc_sigmas = secord::kDefaultTruncationSigmas;
    double threshold = secord::kDefaultScoreThreshold;
    int max_vars = 5;
    int jobs = 1;
    std::string format = "text";
    std::string output;
};

std::map<std::string, secord::ColumnHint> build_hints(const InferArgs& args,
                                                      const std::vector<std::string>& names) {
    std::map<std::string, secord::ColumnHint> hints;
    for (const std::string& spec : args.domain_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
            throw CLI::ValidationError("--domain", "expected col=role, got '" + spec + "'");
        }
        const std::string column = spec.substr(0, eq);
        std::string role_text = spec.substr(eq + 1);
        secord::ColumnHint& hint = hints[column];

        // Optional suffixes: interval:LO:HI, circle:PERIOD, circle-pair:SINCOL.
        std::vector<std::string> parts;
        std::string part;
        std::istringstream stream(role_text);
        while (std::getline(stream, part, ':')) {
            parts.push_back(part);
        }
        if (parts.empty()) {
            throw CLI::ValidationError("--domain", "empty role in '" + spec + "'");
        }
        hint.role = parse_role(parts[0], column);
        try {
            if (hint.role == secord::ColumnRole::Interval && parts.size() == 3) {
                hint.lower = std::stod(parts[1]);
                hint.upper = std::stod(parts[2]);
            } else if (hint.role == secord::ColumnRole::CircleAngle && parts.size() == 2) {
                hint.period = std::stod(parts[1]);
            } else if (hint.role == secord::ColumnRole::CirclePair && parts.size() == 2) {
                hint.pair_column = parts[1];
            } else if (parts.size() != 1) {
                throw CLI::ValidationError("--domain", "unexpected suffix in '" + spec + "'");
            }
        } catch (const std::invalid_argument&) {
            throw CLI::ValidationError("--domain", "non-numeric suffix in '" + spec + "'");
        }
    }
    for (const std::string& spec : args.bin_specs) {
        const auto eq = spec.find('=');
        try {
            if (eq == std::string::npos) {
                const int bins = std::stoi(spec);
                // A bare count applies to every column; binning itself only
                // touches continuum domains.
                for (const std::string& name : names) {
                    hints[name].bins = bins;
                }
            } else {
                hints[spec.substr(0, eq)].bins = std::stoi(spec.substr(eq + 1));
            }
        } catch (const std::invalid_argument&) {
            throw CLI::ValidationError("--bins", "expected col=N or N, got '" + spec + "'");
        }
    }
    return hints;
}

json decision_to_json(const secord::CausalDecision& decision,
                      const std::vector<std::string>& names) {
    json orderings = json::array();
    for (const secord::OrderingScore& score : decision.scores) {
        json names_in_order = json::array();
        for (int v : score.ordering) {
            names_in_order.push_back(names[static_cast<std::size_t>(v)]);
        }
        orderings.push_back({{"ordering", names_in_order},
                             {"nll_per_sample", score.nll_per_sample},
                             {"per_step", score.per_step},
                             {"converged", score.converged}});
    }
    json selected = json::array();
    for (std::size_t idx : decision.selected) {
        selected.push_back(idx);
    }
    json classes = json::array();
    for (const auto& cls : decision.equivalence_classes) {
        classes.push_back(cls);
    }
    return json{{"orderings", orderings},
                {"selected", selected},
                {"verdict", secord::to_string(decision.verdict)},
                {"threshold", decision.threshold_used},
                {"relative_gap", decision.relative_gap},
                {"equivalence_classes", classes}};
}

std::string ordering_arrow(const secord::OrderingScore& score,
                           const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < score.ordering.size(); ++i) {
        if (i) {
            out += " → ";
        }
        out += names[static_cast<std::size_t>(score.ordering[i])];
    }
    return out;
}

std::string decision_to_text(const secord::CausalDecision& decision,
                             const std::vector<std::string>& names) {
    std::ostringstream out;
    char buf[64];
    out << decision.scores.size() << " orderings over " << names.size() << " variables\n";
    std::vector<bool> is_selected(decision.scores.size(), false);
    for (std::size_t idx : decision.selected) {
        is_selected[idx] = true;
    }
    for (std::size_t i = 0; i < decision.scores.size(); ++i) {
        const secord::OrderingScore& score = decision.scores[i];
        std::snprintf(buf, sizeof(buf), "%.4f", score.nll_per_sample);
        out << "  " << (is_selected[i] ? '*' : ' ') << ' ' << ordering_arrow(score, names)
            << "   nll/sample " << buf;
        if (!score.converged) {
            out << "   [fit did not converge]";
        }
        out << '\n';
    }
    std::snprintf(buf, sizeof(buf), "%.3e", decision.relative_gap);
    if (names.size() == 2) {
        const char* glyph = "?";
        if (decision.verdict == secord::Verdict::Forward) {
            glyph = "→";
        } else if (decision.verdict == secord::Verdict::Backward) {
            glyph = "←";
        }
        out << "verdict: " << names[0] << ' ' << glyph << ' ' << names[1] << "   ("
            << secord::to_string(decision.verdict) << ", relative gap " << buf << ", threshold ";
        std::snprintf(buf, sizeof(buf), "%.1e", decision.threshold_used);
        out << buf << ")\n";
    } else {
        out << "verdict: " << secord::to_string(decision.verdict) << " with "
            << decision.selected.size() << " of " << decision.scores.size()
            << " orderings inside the band (relative gap " << buf << ", threshold ";
        std::snprintf(buf, sizeof(buf), "%.1e", decision.threshold_used);
        out << buf << ")\n";
    }
    return out.str();
}

int run_infer(const InferArgs& args) {
    std::vector<std::string> names;
    secord::CausalDecision decision;
    json config{{"threshold", args.threshold},
                {"grid", {{"resolution", args.grid_resolution},
                          {"truncation_sigmas", args.trunc_sigmas}}},
                {"max_vars", args.max_vars},
                {"jobs", args.jobs}};

    if (!args.replay_path.empty()) {
        // Re-derive the decision from a previously saved report, honoring the
        // (possibly different) threshold, without refitting anything.
        std::ifstream file(args.replay_path);
        if (!file) {
            throw std::runtime_error("could not open '" + args.replay_path + "' for reading");
        }
        json report = json::parse(file);
        if (report.contains("result")) {
            report = report["result"];
        }
        if (!report.contains("orderings")) {
            throw std::runtime_error("replay file has no 'orderings' table");
        }
        std::map<std::string, int> index;
        std::vector<secord::OrderingScore> scores;
        for (const json& entry : report["orderings"]) {
            secord::OrderingScore score;
            for (const json& name : entry.at("ordering")) {
                const std::string n = name.get<std::string>();
                auto [it, inserted] = index.try_emplace(n, static_cast<int>(index.size()));
                if (inserted) {
                    names.push_back(n);
                }
                score.ordering.push_back(it->second);
            }
            score.nll_per_sample = entry.at("nll_per_sample").get<double>();
            if (entry.contains("per_step")) {
                score.per_step = entry["per_step"].get<std::vector<double>>();
            }
            if (entry.contains("converged")) {
                score.converged = entry["converged"].get<bool>();
            }
            scores.push_back(std::move(score));
        }
        decision = secord::summarize_scores(std::move(scores), args.threshold);
        config["replay"] = args.replay_path;
    } else {
        secord::Dataset raw = secord::load_csv(args.input);
        if (!args.columns_csv.empty()) {
            secord::Dataset subset;
            subset.row_count = raw.row_count;
            for (const std::string& name : split_list(args.columns_csv)) {
                subset.variables.push_back(raw.variable(name));
            }
            raw = std::move(subset);
        }
        std::vector<std::string> raw_names;
        for (const auto& var : raw.variables) {
            raw_names.push_back(var.name);
        }
        const secord::Dataset prepared = secord::prepare(raw, build_hints(args, raw_names));
        for (const auto& var : prepared.variables) {
            names.push_back(var.name);
        }

        secord::GridOptions grid;
        grid.resolution = args.grid_resolution;
        grid.truncation_sigmas = args.trunc_sigmas;
        const secord::FitContext ctx = secord::make_fit_context(prepared, grid);

        secord::InferOptions options;
        options.grid = grid;
        options.threshold_rel = args.threshold;
        options.max_vars = args.max_vars;
        options.jobs = args.jobs;
        decision = secord::infer_orderings(ctx, options);
        config["input"] = args.input;
        config["columns"] = names;
    }

    if (args.format == "json") {
        json out{{"tool", tool_stamp()},
                 {"config", config},
                 {"variables", names},
                 {"result", decision_to_json(decision, names)}};
        emit(out.dump(2), args.output);
    } else {
        emit(decision_to_text(decision, names), args.output);
    }
    return 0;
}

// --- simulate ----------------------------------------------------------------

struct SimulateArgs {
    std::string model;
    long samples = 1000;
    unsigned seed = 1;
    std::string output;
    // gauss-mixture
    double gamma = 0.5, nu0 = -1.0, nu1 = 1.0, rho = 1.0;
    // gauss-sigmoid
    double nu = 0.0, sigma = 1.0, alpha = 1.0, beta = 0.0;
    // or-gate
    double gate_k = 10.0;
    int gate_inputs = 4;
};

std::string csv_of_pairs(const std::vector<std::pair<double, double>>& xy) {
    std::ostringstream out;
    out << "x,y\n";
    char buf[64];
    for (const auto& [x, y] : xy) {
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", y);
        out << buf << '\n';
    }
    return out.str();
}

// Reproducibility sidecar: every generated CSV written to a file carries a
// .meta.json naming the model, its parameters, the sample count, and the seed.
void write_simulation_meta(const SimulateArgs& args, json parameters) {
    if (args.output.empty()) {
        return;
    }
    const json meta{{"tool", tool_stamp()},
                    {"model", args.model},
                    {"parameters", std::move(parameters)},
                    {"samples", args.samples},
                    {"seed", args.seed},
                    {"output", args.output}};
    std::ofstream file(args.output + ".meta.json");
    if (!file) {
        throw std::runtime_error("cannot write " + args.output + ".meta.json");
    }
    file << meta.dump(2) << '\n';
}

int run_simulate(const SimulateArgs& args) {
    std::mt19937_64 rng(args.seed);
    if (args.model == "gauss-mixture") {
        const secord::GaussMixtureModel model(args.gamma, args.nu0, args.nu1, args.rho);
        emit(csv_of_pairs(secord::sample_gauss_mixture(model, args.samples, rng)), args.output);
        write_simulation_meta(args, json{{"gamma", args.gamma},
                                         {"nu0", args.nu0},
                                         {"nu1", args.nu1},
                                         {"rho", args.rho}});
        return 0;
    }
    if (args.model == "gauss-sigmoid") {
        const secord::GaussSigmoidModel model(args.nu, args.sigma, args.alpha, args.beta);
        emit(csv_of_pairs(secord::sample_gauss_sigmoid(model, args.samples, rng)), args.output);
        write_simulation_meta(args, json{{"nu", args.nu},
                                         {"sigma", args.sigma},
                                         {"alpha", args.alpha},
                                         {"beta", args.beta}});
        return 0;
    }
    if (args.model == "or-gate") {
        const secord::OrJointTable table(args.gate_inputs, args.gate_k);
        const int n = args.gate_inputs;
        // Exact joint sampling by CDF inversion over the 2^n states.
        std::vector<double> cdf(static_cast<std::size_t>(1) << n);
        double acc = 0.0;
        for (std::size_t s = 0; s < cdf.size(); ++s) {
            std::vector<int> state(static_cast<std::size_t>(n));
            for (int b = 0; b < n; ++b) {
                state[static_cast<std::size_t>(b)] = static_cast<int>((s >> b) & 1U);
            }
            acc += table.joint_probability(state);
            cdf[s] = acc;
        }
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::ostringstream out;
        for (int v = 1; v <= n; ++v) {
            out << (v > 1 ? "," : "") << 'x' << v;
        }
        out << '\n';
        for (long i = 0; i < args.samples; ++i) {
            const double u = unif(rng) * acc;
            std::size_t state = 0;
            while (state + 1 < cdf.size() && cdf[state] < u) {
                ++state;
            }
            for (int b = 0; b < n; ++b) {
                out << (b ? "," : "") << ((state >> b) & 1U);
            }
            out << '\n';
        }
        emit(out.str(), args.output);
        write_simulation_meta(
            args, json{{"gate_k", args.gate_k}, {"gate_inputs", args.gate_inputs}});
        return 0;
    }
    throw CLI::ValidationError(
        "--model", "unknown model '" + args.model +
                       "' (expected gauss-mixture, gauss-sigmoid, or-gate)");
}

// --- fisher-check ------------------------------------------------------------

struct FisherArgs {
    bool degenerate = false;
    bool experiment = false;
    std::string direction = "mixture";
    std::string sizes_csv = "256,1024,4096,16384";
    int seed_count = 20;
    unsigned base_seed = 1234;
    bool control = false;
    double modified_gamma = 0.7;
    double modified_theta = 0.35;
    std::string format = "text";
    std::string output;
    // truth parameters, shared with simulate defaults
    double gamma = 0.4, nu0 = -1.0, nu1 = 1.5, rho = 0.8;
    double nu = 0.0, sigma = 1.0, alpha = 1.0, beta = 0.0;
};

json matrix_report(const std::string& name, const Eigen::MatrixXd& m) {
    const double sv = secord::smallest_singular_value_row_normalized(m);
    const int rank = secord::numeric_rank(m);
    return json{{"name", name},
                {"rows", m.rows()},
                {"cols", m.cols()},
                {"smallest_singular_value_row_normalized", sv},
                {"rank", rank},
                {"full_rank", rank == std::min(m.rows(), m.cols())}};
}

int run_fisher(const FisherArgs& args) {
    if (args.experiment) {
        secord::SplitSampleOptions options;
        for (const std::string& s : split_list(args.sizes_csv)) {
            options.sample_sizes.push_back(std::stol(s));
        }
        for (int i = 0; i < args.seed_count; ++i) {
            options.seeds.push_back(args.base_seed + static_cast<unsigned>(i));
        }
        options.independence_control = args.control;

        secord::DependenceReport report;
        if (args.direction == "mixture") {
            const secord::GaussMixtureModel truth(args.gamma, args.nu0, args.nu1, args.rho);
            report = secord::split_sample_experiment(secord::SplitDirection::MixtureForward,
                                                     truth, args.modified_gamma, options);
        } else if (args.direction == "sigmoid") {
            const secord::GaussSigmoidModel truth(args.nu, args.sigma, args.alpha, args.beta);
            report = secord::split_sample_experiment(secord::SplitDirection::SigmoidForward,
                                                     truth, args.modified_theta, options);
        } else {
            throw CLI::ValidationError("--direction", "expected mixture or sigmoid");
        }

        if (args.format == "csv") {
            emit(secord::dependence_report_to_csv(report), args.output);
        } else if (args.format == "json") {
            json out{{"tool", tool_stamp()},
                     {"config",
                      {{"direction", args.direction},
                       {"sizes", report.sample_sizes},
                       {"seed_count", args.seed_count},
                       {"base_seed", args.base_seed},
                       {"independence_control", args.control}}},
                     {"result", json::parse(secord::dependence_report_to_json(report))}};
            emit(out.dump(2), args.output);
        } else {
            std::ostringstream out;
            char buf[64];
            out << "split-sample dependence probe (" << args.direction << " direction"
                << (args.control ? ", independence control" : "") << ")\n";
            for (std::size_t i = 0; i < report.sample_sizes.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%.4f", report.median_proxy_bits[i]);
                out << "  k = " << report.sample_sizes[i] << "   median shared bits " << buf
                    << '\n';
            }
            std::snprintf(buf, sizeof(buf), "%.4f", report.fitted_slope);
            out << "slope of median shared bits per doubling of k: " << buf << '\n';
            emit(out.str(), args.output);
        }
        return 0;
    }

    // Rank diagnostics of the three derivative matrices at their reference
    // evaluation points.
    const Eigen::Vector4d eta_pyx(1.0, 1.0, 1.0, 1.0);
    const Eigen::Vector4d points_pyx(1.0, 2.0, 3.0, 4.0);
    const Eigen::Matrix4d m_pyx = secord::appendix_matrix_pyx(eta_pyx, 0.0, points_pyx);

    const Eigen::Vector4d theta_py(0.5, 0.0, 1.0, 1.0);
    const Eigen::Vector4d points_py(1.0, 2.0, 3.0, 4.0);
    const Eigen::Matrix4d m_py = secord::appendix_matrix_py(theta_py, points_py);

    const Eigen::Vector2d eta_pxy(1.0, 1.0);
    const Eigen::Vector2d points_pxy(1.0, 2.0);
    const Eigen::Matrix2d m_pxy = secord::appendix_matrix_pxy(eta_pxy, points_pxy);

    json checks = json::array();
    checks.push_back(matrix_report("conditional-response", m_pyx));
    checks.push_back(matrix_report("mixture-marginal", m_py));
    checks.push_back(matrix_report("anticausal-response", m_pxy));

    if (args.degenerate) {
        // A deliberately overparameterized family: two location parameters
        // that only enter through their sum, so the information matrix loses
        // a dimension.
        secord::DensityFamily family;
        family.parameter_labels = {"nu_a", "nu_b", "sigma"};
        family.density = [](const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
            return secord::normal_pdf(x(0), theta(0) + theta(1), theta(2));
        };
        secord::TruncationSpec trunc;
        trunc.center = 0.0;
        trunc.half_width = 10.0;
        const secord::QuadratureGrid grid =
            secord::build_grid(secord::ValueDomain::full_real(), 512, trunc);
        Eigen::VectorXd theta(3);
        theta << 0.3, -0.3, 1.0;
        const secord::FisherMatrix fm = secord::fisher_marginal(family, theta, grid);
        json entry = matrix_report("duplicated-location", fm.matrix);
        entry["smallest_eigenvalue"] = fm.smallest_eigenvalue;
        checks.push_back(entry);
    }

    if (args.format == "json") {
        json out{{"tool", tool_stamp()}, {"checks", checks}};
        emit(out.dump(2), args.output);
    } else {
        std::ostringstream out;
        char buf[64];
        for (const json& c : checks) {
            std::snprintf(buf, sizeof(buf), "%.3e",
                          c["smallest_singular_value_row_normalized"].get<double>());
            out << c["name"].get<std::string>() << ": rank " << c["rank"].get<int>() << " of "
                << std::min(c["rows"].get<long>(), c["cols"].get<long>())
                << ", smallest row-normalized singular value " << buf
                << (c["full_rank"].get<bool>() ? "" : "   [degenerate]") << '\n';
        }
        emit(out.str(), args.output);
    }
    return 0;
}

// --- gate-demo ---------------------------------------------------------------

struct GateArgs {
    double gate_k = 10.0;
    int gate_inputs = 4;
    int max_degree = -1;  // default: number of conditioning inputs
    double fit_tolerance = 1e-3;
    std::string format = "text";
    std::string output;
};

int run_gate(const GateArgs& args) {
    const secord::OrJointTable table(args.gate_inputs, args.gate_k);
    const secord::ConditionalTable causal = table.causal_table();
    const secord::ConditionalTable reverse = table.reverse_table();
    const int causal_max =
        args.max_degree > 0 ? args.max_degree : causal.input_count;
    const int reverse_max =
        args.max_degree > 0 ? args.max_degree : reverse.input_count;
    const secord::DegreeFit causal_fit =
        secord::minimal_tanh_degree(causal, causal_max, args.fit_tolerance);
    const secord::DegreeFit reverse_fit =
        secord::minimal_tanh_degree(reverse, reverse_max, args.fit_tolerance);

    const int n = table.variable_count();
    const std::size_t states = static_cast<std::size_t>(1) << n;
    double output_marginal = 0.0;
    for (std::size_t s = 0; s < states; ++s) {
        if (!((s >> (n - 1)) & 1U)) {
            continue;
        }
        std::vector<int> state(static_cast<std::size_t>(n));
        for (int b = 0; b < n; ++b) {
            state[static_cast<std::size_t>(b)] = static_cast<int>((s >> b) & 1U);
        }
        output_marginal += table.joint_probability(state);
    }
    const int expected_backward = n - 2;
    const auto rms_at = [](const secord::DegreeFit& fit) {
        const auto idx = static_cast<std::size_t>(fit.degree);
        return fit.fitted && idx < fit.rms_residuals.size()
                   ? fit.rms_residuals[idx]
                   : std::numeric_limits<double>::quiet_NaN();
    };

    if (args.format == "json") {
        json out{{"tool", tool_stamp()},
                 {"config",
                  {{"gate_k", args.gate_k},
                   {"gate_inputs", args.gate_inputs},
                   {"fit_tolerance", args.fit_tolerance}}},
                 {"joint",
                  {{"variables", n},
                   {"states", states},
                   {"output_marginal", output_marginal}}},
                 {"forward",
                  {{"inputs", causal.input_count},
                   {"minimal_degree", causal_fit.degree},
                   {"rms_at_degree", rms_at(causal_fit)},
                   {"rms_by_degree", causal_fit.rms_residuals}}},
                 {"backward",
                  {{"inputs", reverse.input_count},
                   {"minimal_degree", reverse_fit.degree},
                   {"expected_degree", expected_backward},
                   {"rms_at_degree", rms_at(reverse_fit)},
                   {"rms_by_degree", reverse_fit.rms_residuals}}}};
        emit(out.dump(2), args.output);
    } else {
        std::ostringstream out;
        out << "disjunction gate, " << (n - 1) << " inputs, sharpness "
            << args.gate_k << '\n';
        out << "  joint table: " << n << " variables, " << states
            << " states, p(output=1) = " << output_marginal << '\n';
        out << "  forward conditional (output given inputs): interaction degree "
            << causal_fit.degree << ", rms residual " << rms_at(causal_fit) << '\n';
        out << "  backward conditional (one input given the rest): interaction degree "
            << reverse_fit.degree << " (expected " << expected_backward
            << "), rms residual " << rms_at(reverse_fit) << '\n';
        out << (reverse_fit.degree > causal_fit.degree
                    ? "the backward direction needs strictly higher-order interactions\n"
                    : "no degree asymmetry at these settings\n");
        emit(out.str(), args.output);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal direction inference via second-order exponential conditionals"};
    app.set_version_flag("--version", std::string("secord ") + SECORD_VERSION);
    app.require_subcommand(1);

    InferArgs infer_args;
    CLI::App* infer = app.add_subcommand("infer", "Score causal orderings of a dataset");
    infer->add_option("--input,-i", infer_args.input, "CSV file with one column per variable");
    infer->add_option("--columns", infer_args.columns_csv,
                      "Comma-separated subset of columns to analyze, in order");
    infer->add_option("--domain", infer_args.domain_specs,
                      "Column role override, col=role (roles: auto, binary, finite, integers, "
                      "interval[:lo:hi], positive, real, circle[:period], circle-pair:sincol)");
    infer->add_option("--bins", infer_args.bin_specs,
                      "Equal-width binning for continuum columns, col=N or a bare N for all");
    infer->add_option("--grid", infer_args.grid_resolution,
                      "Quadrature resolution for continuum variables")
        ->check(CLI::Range(2, 1 << 20));
    infer->add_option("--trunc-sigmas", infer_args.trunc_sigmas,
                      "Half-width of the integration window, in standard deviations")
        ->check(CLI::PositiveNumber);
    infer->add_option("--threshold", infer_args.threshold,
                      "Relative score band inside which orderings are indistinguishable")
        ->check(CLI::NonNegativeNumber);
    infer->add_option("--max-vars", infer_args.max_vars,
                      "Upper bound on the variable count (ordering fits grow factorially)")
        ->check(CLI::Range(2, 12));
    infer->add_option("--jobs", infer_args.jobs, "Concurrent ordering fits")
        ->check(CLI::Range(1, 256));
    infer->add_option("--replay-scores", infer_args.replay_path,
                      "Re-derive the decision from a saved JSON report instead of fitting");
    infer->add_option("--format", infer_args.format, "Output format")
        ->check(CLI::IsMember({"text", "json"}));
    infer->add_option("--output,-o", infer_args.output, "Write the report here instead of stdout");

    SimulateArgs sim_args;
    CLI::App* simulate = app.add_subcommand("simulate", "Draw samples from a built-in model");
    simulate->add_option("--model", sim_args.model,
                         "gauss-mixture, gauss-sigmoid, or or-gate")
        ->required();
    simulate->add_option("--samples,-n", sim_args.samples, "Number of rows")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sim_args.seed, "Random seed");
    simulate->add_option("--output,-o", sim_args.output, "Write CSV here instead of stdout");
    simulate->add_option("--gamma", sim_args.gamma,
                         "Mixture weight of the nu1 component (P(x = 1))");
    simulate->add_option("--nu0", sim_args.nu0, "Lower component mean");
    simulate->add_option("--nu1", sim_args.nu1, "Upper component mean");
    simulate->add_option("--rho", sim_args.rho, "Shared component standard deviation");
    simulate->add_option("--nu", sim_args.nu, "Gaussian cause mean");
    simulate->add_option("--sigma", sim_args.sigma, "Gaussian cause standard deviation");
    simulate->add_option("--alpha", sim_args.alpha, "Response slope");
    simulate->add_option("--beta", sim_args.beta, "Response offset");
    simulate->add_option("--gate-k", sim_args.gate_k, "Gate sharpness");
    simulate->add_option("--gate-inputs", sim_args.gate_inputs,
                         "Total variable count of the gate (output plus inputs)")
        ->check(CLI::Range(3, 12));

    FisherArgs fisher_args;
    CLI::App* fisher = app.add_subcommand(
        "fisher-check", "Information-matrix rank diagnostics and the split-sample probe");
    fisher->add_flag("--degenerate", fisher_args.degenerate,
                     "Also check a deliberately overparameterized family");
    fisher->add_flag("--experiment", fisher_args.experiment,
                     "Run the split-sample dependence experiment");
    fisher->add_option("--direction", fisher_args.direction,
                       "Experiment direction: mixture or sigmoid");
    fisher->add_option("--sizes", fisher_args.sizes_csv, "Comma-separated sample sizes");
    fisher->add_option("--seed-count", fisher_args.seed_count, "Paired samples per size")
        ->check(CLI::Range(1, 10000));
    fisher->add_option("--seed", fisher_args.base_seed, "Base random seed");
    fisher->add_flag("--control", fisher_args.control,
                     "Break the parameter coupling (independence control)");
    fisher->add_option("--modified-gamma", fisher_args.modified_gamma,
                       "Mixing weight used for the second sample (mixture direction)");
    fisher->add_option("--modified-theta", fisher_args.modified_theta,
                       "Response frequency used for the second sample (sigmoid direction)");
    fisher->add_option("--gamma", fisher_args.gamma, "Mixture truth: weight");
    fisher->add_option("--nu0", fisher_args.nu0, "Mixture truth: lower mean");
    fisher->add_option("--nu1", fisher_args.nu1, "Mixture truth: upper mean");
    fisher->add_option("--rho", fisher_args.rho, "Mixture truth: width");
    fisher->add_option("--nu", fisher_args.nu, "Sigmoid truth: cause mean");
    fisher->add_option("--sigma", fisher_args.sigma, "Sigmoid truth: cause width");
    fisher->add_option("--alpha", fisher_args.alpha, "Sigmoid truth: slope");
    fisher->add_option("--beta", fisher_args.beta, "Sigmoid truth: offset");
    fisher->add_option("--format", fisher_args.format, "Output format")
        ->check(CLI::IsMember({"text", "json", "csv"}));
    fisher->add_option("--output,-o", fisher_args.output,
                       "Write the report here instead of stdout");

    GateArgs gate_args;
    CLI::App* gate = app.add_subcommand(
        "gate-demo", "Forward/backward interaction-degree asymmetry of a disjunction gate");
    gate->add_option("--gate-k", gate_args.gate_k, "Gate sharpness");
    gate->add_option("--gate-inputs", gate_args.gate_inputs,
                     "Total variable count of the gate (output plus inputs)")
        ->check(CLI::Range(3, 12));
    gate->add_option("--max-degree", gate_args.max_degree,
                     "Highest interaction degree to try (default: all inputs)");
    gate->add_option("--fit-tolerance", gate_args.fit_tolerance,
                     "RMS tolerance for accepting a degree")
        ->check(CLI::PositiveNumber);
    gate->add_option("--format", gate_args.format, "Output format")
        ->check(CLI::IsMember({"text", "json"}));
    gate->add_option("--output,-o", gate_args.output, "Write the report here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*infer) {
            if (infer_args.input.empty() && infer_args.replay_path.empty()) {
                std::cerr << "error: infer needs --input or --replay-scores\n";
                return 1;
            }
            return run_infer(infer_args);
        }
        if (*simulate) {
            return run_simulate(sim_args);
        }
        if (*fisher) {
            return run_fisher(fisher_args);
        }
        if (*gate) {
            return run_gate(gate_args);
        }
    } catch (const CLI::Error& err) {
        return app.exit(err);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    return 0;
}
