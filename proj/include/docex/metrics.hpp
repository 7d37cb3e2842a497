#pragma once

#include <stdexcept>
#include <vector>

#include "docex/geometry.hpp"

namespace docex {

struct EmptyGroundTruth : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct EmptyPrediction : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct EmptyJudgmentSet : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct MatchThresholds {
    double thres_em = 0.6;
    double thres_min = 0.8;
};

enum class IouKind { Em, Min };

struct BoxSetReport {
    double recall_min = 0.0;
    double recall_em = 0.0;
    double precision_min = 0.0;
    double f1_min = 0.0;
    std::vector<std::size_t> matched_gt_indices;    // gt boxes matched under IoU_min
    std::vector<std::size_t> matched_pred_indices;  // pred boxes matched under IoU_min
};

struct TrajectoryScore {
    double sum_score = 0.0;   // Recall_min + Recall_EM, in [0,2]
    double mean_score = 0.0;  // sum_score / 2
};

/// Fraction of gt boxes whose best-matching pred box meets the kind-specific
/// threshold (inclusive). Each gt box matches independently; one pred box may
/// satisfy several gt boxes. Empty pred yields 0.
double box_set_recall(const std::vector<NormBox>& gt, const std::vector<NormBox>& pred,
                      IouKind kind, const MatchThresholds& thresholds);

/// Fraction of pred boxes whose best-matching gt box reaches thres_min under
/// IoU_min. Empty gt yields 0.
double box_set_precision_min(const std::vector<NormBox>& gt,
                             const std::vector<NormBox>& pred,
                             const MatchThresholds& thresholds);

double f1_min(double recall_min, double precision_min);

TrajectoryScore trajectory_score(const std::vector<NormBox>& gt,
                                 const std::vector<NormBox>& pred,
                                 const MatchThresholds& thresholds);

/// Full recall/precision/F1 report for one gt/pred pair; tolerates an empty
/// side (the corresponding ratios are 0).
BoxSetReport box_set_report(const std::vector<NormBox>& gt,
                            const std::vector<NormBox>& pred,
                            const MatchThresholds& thresholds);

struct PageJudgment {
    bool expected_relevant = false;
    bool predicted_relevant = false;  // final evidence list non-empty
};

/// Fraction of pages where the relevance verdict matches the label.
double page_accuracy(const std::vector<PageJudgment>& judgments);

}  // namespace docex
