#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "secord/closedform.hpp"
#include "secord/infer.hpp"

using secord::CausalDecision;
using secord::FitContext;
using secord::InferOptions;
using secord::OrderingScore;
using secord::Verdict;

namespace {

std::pair<std::vector<double>, std::vector<double>> split_pairs(
    const std::vector<std::pair<double, double>>& xy) {
    std::vector<double> xs, ys;
    for (const auto& [x, y] : xy) {
        xs.push_back(x);
        ys.push_back(y);
    }
    return {xs, ys};
}

OrderingScore score_of(std::vector<int> ordering, double value) {
    OrderingScore s;
    s.ordering = std::move(ordering);
    s.nll_per_sample = value;
    return s;
}

}  // namespace

TEST_CASE("the pairwise rule decides by the smaller score outside the band") {
    CHECK(secord::decide(3.3697, 3.4366) == Verdict::Forward);
    CHECK(secord::decide(4.9918, 4.9920) == Verdict::Undecided);
    CHECK(secord::decide(3.8770, 3.8758) == Verdict::Backward);
    CHECK(secord::decide(1.0, 1.0) == Verdict::Undecided);
    CHECK(secord::decide(5.25, 5.25) == Verdict::Undecided);

    SUBCASE("band edges scale with the mean score") {
        const double l = 2.0;
        const double inside = l * (1.0 + 0.9e-4);
        const double outside = l * (1.0 + 3.0e-4);
        CHECK(secord::decide(l, inside) == Verdict::Undecided);
        CHECK(secord::decide(l, outside) == Verdict::Forward);
        CHECK(secord::decide(outside, l) == Verdict::Backward);
    }

    SUBCASE("non-finite scores are rejected") {
        CHECK_THROWS_AS(secord::decide(std::nan(""), 1.0), std::invalid_argument);
        CHECK_THROWS_AS(secord::decide(1.0, INFINITY), std::invalid_argument);
    }
}

TEST_CASE("score summaries select the threshold band around the minimum") {
    SUBCASE("two orderings, forward wins") {
        const auto d = secord::summarize_scores(
            {score_of({0, 1}, 3.3697), score_of({1, 0}, 3.4366)}, 1e-4);
        CHECK(d.verdict == Verdict::Forward);
        REQUIRE(d.selected.size() == 1);
        CHECK(d.selected[0] == 0);
        CHECK(d.relative_gap == doctest::Approx((3.4366 - 3.3697) / (0.5 * (3.4366 + 3.3697))));
    }

    SUBCASE("ties are reported as a set, never broken") {
        const auto d = secord::summarize_scores(
            {score_of({0, 1}, 5.0), score_of({1, 0}, 5.0)}, 1e-4);
        CHECK(d.verdict == Verdict::Undecided);
        CHECK(d.selected.size() == 2);
        REQUIRE(d.equivalence_classes.size() >= 1);
        CHECK(d.equivalence_classes[0].size() == 2);
    }

    SUBCASE("enlarging the threshold never shrinks the selected set") {
        const std::vector<OrderingScore> scores{
            score_of({0, 1, 2}, 3.00), score_of({0, 2, 1}, 3.0001),
            score_of({1, 0, 2}, 3.001), score_of({1, 2, 0}, 3.01),
            score_of({2, 0, 1}, 3.1),  score_of({2, 1, 0}, 4.0),
        };
        std::size_t previous = 0;
        for (double threshold : {0.0, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1}) {
            const auto d = secord::summarize_scores(scores, threshold);
            CHECK(d.selected.size() >= previous);
            previous = d.selected.size();
            // selected is exactly the band L - Lmin <= threshold * Lmin
            for (std::size_t i = 0; i < scores.size(); ++i) {
                const bool in_band =
                    scores[i].nll_per_sample - 3.00 <= threshold * 3.00 + 1e-15;
                const bool selected = std::find(d.selected.begin(), d.selected.end(), i) !=
                                      d.selected.end();
                CHECK(selected == in_band);
            }
        }
    }

    SUBCASE("multi-variable verdicts are ordering sets") {
        const auto d = secord::summarize_scores(
            {score_of({0, 1, 2}, 3.0), score_of({0, 2, 1}, 3.5),
             score_of({1, 0, 2}, 3.5), score_of({1, 2, 0}, 3.5),
             score_of({2, 0, 1}, 3.5), score_of({2, 1, 0}, 3.5)},
            1e-4);
        CHECK(d.verdict == Verdict::OrderingSet);
        CHECK(d.selected.size() == 1);
    }

    SUBCASE("degenerate input is rejected") {
        CHECK_THROWS_AS(secord::summarize_scores({score_of({0, 1}, 1.0)}, 1e-4),
                        std::invalid_argument);
        CHECK_THROWS_AS(secord::summarize_scores(
                            {score_of({0, 1}, 1.0), score_of({1}, 1.0)}, 1e-4),
                        std::invalid_argument);
    }
}

TEST_CASE("sigmoid-response data puts the continuous variable first") {
    std::mt19937_64 rng(1234);
    const secord::GaussSigmoidModel truth(0.0, 1.0, 2.0, 0.0);
    const auto [xs, ys] = split_pairs(secord::sample_gauss_sigmoid(truth, 2000, rng));
    const FitContext data = secord::make_fit_context({xs, ys}, {"x", "y"});
    const CausalDecision d = secord::infer_orderings(data);
    CHECK(d.verdict == Verdict::Backward);  // y (the Gaussian input) causes x
    REQUIRE(!d.selected.empty());
    CHECK(d.scores[d.selected[0]].ordering == std::vector<int>{1, 0});
}

TEST_CASE("independent product data stays undecided") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> xs, ys;
    for (int i = 0; i < 2000; ++i) {
        xs.push_back(unif(rng) < 0.5 ? 1.0 : 0.0);
        ys.push_back(gauss(rng));
    }
    const FitContext data = secord::make_fit_context({xs, ys}, {"x", "y"});
    const CausalDecision d = secord::infer_orderings(data);
    CHECK(d.verdict == Verdict::Undecided);
    CHECK(d.selected.size() == 2);
}

TEST_CASE("gate data places the output variable last in every selected ordering") {
    // Exact-table sampling of a four-bit disjunction gate, output = last bit.
    const secord::OrJointTable table(4, 10.0);
    std::vector<double> cdf;
    double acc = 0.0;
    for (int s = 0; s < 16; ++s) {
        std::vector<int> state(4);
        for (int b = 0; b < 4; ++b) state[static_cast<std::size_t>(b)] = (s >> b) & 1;
        acc += table.joint_probability(state);
        cdf.push_back(acc);
    }
    std::mt19937_64 rng(5150);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::vector<double>> columns(4);
    for (int i = 0; i < 5000; ++i) {
        const double u = unif(rng) * acc;
        int state = 0;
        while (state + 1 < 16 && cdf[static_cast<std::size_t>(state)] < u) ++state;
        for (int b = 0; b < 4; ++b) {
            columns[static_cast<std::size_t>(b)].push_back((state >> b) & 1);
        }
    }
    const FitContext data =
        secord::make_fit_context(columns, {"x1", "x2", "x3", "x4"});
    const CausalDecision d = secord::infer_orderings(data);
    REQUIRE(!d.selected.empty());
    for (std::size_t idx : d.selected) {
        CHECK(d.scores[idx].ordering.back() == 3);
    }
}

TEST_CASE("swapping the two columns swaps the verdict") {
    std::mt19937_64 rng(4321);
    const secord::GaussSigmoidModel truth(0.0, 1.0, 2.0, 0.0);
    const auto [xs, ys] = split_pairs(secord::sample_gauss_sigmoid(truth, 1500, rng));

    const CausalDecision xy = secord::decide_pairwise(xs, ys);
    const CausalDecision yx = secord::decide_pairwise(ys, xs);
    CHECK(xy.verdict == Verdict::Backward);
    CHECK(yx.verdict == Verdict::Forward);
    CHECK(xy.scores[0].nll_per_sample ==
          doctest::Approx(yx.scores[1].nll_per_sample).epsilon(1e-12));
    CHECK(xy.scores[1].nll_per_sample ==
          doctest::Approx(yx.scores[0].nll_per_sample).epsilon(1e-12));

    SUBCASE("undecided stays undecided under the swap") {
        std::vector<double> as, bs;
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int i = 0; i < 1200; ++i) {
            as.push_back(unif(rng) < 0.5 ? 1.0 : 0.0);
            bs.push_back(gauss(rng));
        }
        CHECK(secord::decide_pairwise(as, bs).verdict == Verdict::Undecided);
        CHECK(secord::decide_pairwise(bs, as).verdict == Verdict::Undecided);
    }
}

TEST_CASE("pairwise convenience equals the general enumeration") {
    std::mt19937_64 rng(2479);
    const secord::GaussMixtureModel truth(0.5, -2.0, 2.0, 1.0);
    const auto [xs, ys] = split_pairs(secord::sample_gauss_mixture(truth, 800, rng));

    const CausalDecision wrapped = secord::decide_pairwise(xs, ys);
    const FitContext data = secord::make_fit_context({xs, ys}, {"x", "y"});
    const CausalDecision general = secord::infer_orderings(data);

    REQUIRE(wrapped.scores.size() == 2);
    REQUIRE(general.scores.size() == 2);
    CHECK(wrapped.scores[0].nll_per_sample ==
          doctest::Approx(general.scores[0].nll_per_sample).epsilon(1e-12));
    CHECK(wrapped.scores[1].nll_per_sample ==
          doctest::Approx(general.scores[1].nll_per_sample).epsilon(1e-12));
    CHECK(wrapped.verdict == general.verdict);
    CHECK(wrapped.verdict == secord::decide(wrapped.scores[0].nll_per_sample,
                                            wrapped.scores[1].nll_per_sample,
                                            wrapped.threshold_used));
}

TEST_CASE("concurrent ordering fits give the same scores as serial ones") {
    std::mt19937_64 rng(31415);
    const secord::GaussMixtureModel truth(0.4, -1.0, 1.5, 0.8);
    const auto [xs, ys] = split_pairs(secord::sample_gauss_mixture(truth, 600, rng));
    std::vector<double> zs;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 600; ++i) zs.push_back(unif(rng) < 0.3 ? 1.0 : 0.0);

    const FitContext data = secord::make_fit_context({xs, ys, zs}, {"x", "y", "z"});
    InferOptions serial;
    InferOptions parallel;
    parallel.jobs = 4;
    const CausalDecision a = secord::infer_orderings(data, serial);
    const CausalDecision b = secord::infer_orderings(data, parallel);
    REQUIRE(a.scores.size() == 6);
    REQUIRE(b.scores.size() == 6);
    for (std::size_t i = 0; i < a.scores.size(); ++i) {
        CHECK(a.scores[i].ordering == b.scores[i].ordering);
        CHECK(a.scores[i].nll_per_sample == b.scores[i].nll_per_sample);
    }
    CHECK(a.verdict == b.verdict);
}

TEST_CASE("the factorial guard rejects oversized variable sets") {
    std::vector<std::vector<double>> columns;
    std::vector<std::string> names;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> column;
        for (int i = 0; i < 40; ++i) column.push_back((i + c) % 2);
        columns.push_back(column);
        names.push_back("v" + std::to_string(c));
    }
    const FitContext data = secord::make_fit_context(columns, names);
    InferOptions options;
    options.max_vars = 2;
    CHECK_THROWS_WITH_AS(secord::infer_orderings(data, options),
                         doctest::Contains("max_vars"), std::invalid_argument);
}
