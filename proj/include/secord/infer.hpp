#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "secord/fit.hpp"

namespace secord {

enum class Verdict { Forward, Backward, Undecided, OrderingSet };

const char* to_string(Verdict v);

/// Relative score threshold below which competing orderings are
/// indistinguishable.
inline constexpr double kDefaultScoreThreshold = 1e-4;

struct InferOptions {
    FitOptions fit;
    GridOptions grid;
    double threshold_rel = kDefaultScoreThreshold;
    int max_vars = 5;  // guard on the factorial ordering enumeration
    int jobs = 1;      // concurrent ordering fits
};

struct OrderingScore {
    std::vector<int> ordering;
    double nll_per_sample = 0.0;
    std::vector<double> per_step;  // kernel scores along the ordering
    bool converged = true;
};

struct CausalDecision {
    std::vector<OrderingScore> scores;       // lexicographic ordering enumeration
    std::vector<std::size_t> selected;       // indices into scores, best first
    Verdict verdict = Verdict::Undecided;
    double threshold_used = kDefaultScoreThreshold;
    double relative_gap = 0.0;               // |L1-L2| / mean of the two best scores
    /// Orderings whose scores coincide within 1e-12, grouped (indices into
    /// scores; classes ordered by score).
    std::vector<std::vector<std::size_t>> equivalence_classes;
};

/// Pairwise decision rule on two ordering scores: undecided when
/// |a - b| <= threshold_rel * (a + b) / 2, otherwise the smaller score wins
/// (Forward when `score_forward` is smaller).  Throws on non-finite scores.
Verdict decide(double score_forward, double score_backward,
               double threshold_rel = kDefaultScoreThreshold);

/// Fit every ordering of the context's variables and select the ones whose
/// score is indistinguishable from the minimum.  For two variables the
/// selected set uses the pairwise rule above; for more, the band
/// L - L_min <= threshold_rel * L_min.  The verdict is Forward/Backward/
/// Undecided for two variables and OrderingSet otherwise.  Throws when the
/// variable count exceeds options.max_vars (restrict the variable set or
/// raise the limit).
CausalDecision infer_orderings(const FitContext& data, const InferOptions& options = {});

/// Selection, verdict, gap, and equivalence classes for precomputed ordering
/// scores (the pure-decision half of infer_orderings; also used to replay a
/// saved score table under a different threshold).  `scores` must be the
/// full lexicographic enumeration: for two variables the first entry is
/// read as the forward ordering.
CausalDecision summarize_scores(std::vector<OrderingScore> scores, double threshold_rel);

/// Convenience wrapper for two scalar columns: domains are inferred, the
/// pair is fitted both ways, and the pairwise rule applied.  Forward means
/// "x causes y".
CausalDecision decide_pairwise(const std::vector<double>& column_x,
                               const std::vector<double>& column_y,
                               const InferOptions& options = {},
                               const DomainHints& hints = {});

}  // namespace secord
