#include "secord/infer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace secord {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Forward: return "forward";
        case Verdict::Backward: return "backward";
        case Verdict::Undecided: return "undecided";
        case Verdict::OrderingSet: return "ordering-set";
    }
    return "unknown";
}

Verdict decide(double score_forward, double score_backward, double threshold_rel) {
    if (!std::isfinite(score_forward) || !std::isfinite(score_backward))
        throw std::invalid_argument("decide: scores must be finite");
    const double band = threshold_rel * 0.5 * (score_forward + score_backward);
    if (std::abs(score_forward - score_backward) <= band) return Verdict::Undecided;
    return score_forward < score_backward ? Verdict::Forward : Verdict::Backward;
}

namespace {

std::vector<std::vector<int>> all_orderings(int n) {
    std::vector<int> base(static_cast<std::size_t>(n));
    std::iota(base.begin(), base.end(), 0);
    std::vector<std::vector<int>> out;
    do {
        out.push_back(base);
    } while (std::next_permutation(base.begin(), base.end()));
    return out;
}

}  // namespace

CausalDecision infer_orderings(const FitContext& data, const InferOptions& options) {
    const int n = data.variable_count();
    if (n < 2) throw std::invalid_argument("infer_orderings: need at least two variables");
    if (n > options.max_vars) {
        std::stringstream msg;
        msg << "infer_orderings: " << n << " variables would need " << n
            << "! ordering fits, above the limit of " << options.max_vars
            << "; restrict the variable set or raise max_vars";
        throw std::invalid_argument(msg.str());
    }

    const std::vector<std::vector<int>> orderings = all_orderings(n);
    std::vector<OrderingScore> scores(orderings.size());

    const int jobs = std::max(1, options.jobs);
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error = nullptr;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= orderings.size()) return;
            try {
                FittedOrderingModel fitted = fit_ordering(data, orderings[i], options.fit);
                OrderingScore s;
                s.ordering = orderings[i];
                s.nll_per_sample = fitted.total_nll;
                for (const auto& step : fitted.steps) s.per_step.push_back(step.nll_per_sample);
                s.converged = fitted.all_converged();
                scores[i] = std::move(s);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    if (jobs == 1 || orderings.size() == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(jobs), orderings.size());
        for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    return summarize_scores(std::move(scores), options.threshold_rel);
}

CausalDecision summarize_scores(std::vector<OrderingScore> scores, double threshold_rel) {
    if (scores.size() < 2) {
        throw std::invalid_argument("summarize_scores: need at least two ordering scores");
    }
    const int n = static_cast<int>(scores.front().ordering.size());
    for (const OrderingScore& s : scores) {
        if (static_cast<int>(s.ordering.size()) != n) {
            throw std::invalid_argument("summarize_scores: orderings have mixed lengths");
        }
    }

    CausalDecision decision;
    decision.scores = std::move(scores);
    decision.threshold_used = threshold_rel;

    std::vector<std::size_t> by_score(decision.scores.size());
    std::iota(by_score.begin(), by_score.end(), 0);
    std::stable_sort(by_score.begin(), by_score.end(), [&](std::size_t a, std::size_t b) {
        return decision.scores[a].nll_per_sample < decision.scores[b].nll_per_sample;
    });
    const double best = decision.scores[by_score.front()].nll_per_sample;
    if (!std::isfinite(best))
        throw std::runtime_error("infer_orderings: ordering scores are non-finite");

    for (std::size_t idx : by_score) {
        const double s = decision.scores[idx].nll_per_sample;
        const bool in_band = (n == 2)
                                 ? std::abs(s - best) <= threshold_rel * 0.5 * (s + best)
                                 : (s - best) <= threshold_rel * best;
        if (in_band) decision.selected.push_back(idx);
    }

    // Equivalence classes: chains of scores separated by at most 1e-12.
    std::vector<std::size_t> current{by_score.front()};
    for (std::size_t i = 1; i < by_score.size(); ++i) {
        const double prev = decision.scores[by_score[i - 1]].nll_per_sample;
        const double cur = decision.scores[by_score[i]].nll_per_sample;
        if (cur - prev <= 1e-12) {
            current.push_back(by_score[i]);
        } else {
            decision.equivalence_classes.push_back(std::move(current));
            current = {by_score[i]};
        }
    }
    decision.equivalence_classes.push_back(std::move(current));

    if (by_score.size() >= 2) {
        const double second = decision.scores[by_score[1]].nll_per_sample;
        const double denom = 0.5 * (second + best);
        decision.relative_gap = denom != 0.0 ? std::abs(second - best) / denom : 0.0;
    }

    if (n == 2) {
        decision.verdict = decide(decision.scores[0].nll_per_sample,
                                  decision.scores[1].nll_per_sample, threshold_rel);
    } else {
        decision.verdict = Verdict::OrderingSet;
    }
    return decision;
}

CausalDecision decide_pairwise(const std::vector<double>& column_x,
                               const std::vector<double>& column_y,
                               const InferOptions& options, const DomainHints& hints) {
    FitContext ctx = make_fit_context({column_x, column_y}, {"x", "y"}, options.grid, hints);
    return infer_orderings(ctx, options);
}

}  // namespace secord
