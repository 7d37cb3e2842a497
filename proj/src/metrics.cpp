#include "docex/metrics.hpp"

#include <algorithm>

namespace docex {

namespace {

double best_iou(const NormBox& box, const std::vector<NormBox>& others, IouKind kind) {
    double best = 0.0;
    for (const NormBox& other : others) {
        const double v = kind == IouKind::Em ? iou_em(box, other) : iou_min(box, other);
        best = std::max(best, v);
    }
    return best;
}

}  // namespace

double box_set_recall(const std::vector<NormBox>& gt, const std::vector<NormBox>& pred,
                      IouKind kind, const MatchThresholds& thresholds) {
    if (gt.empty()) throw EmptyGroundTruth("recall undefined for empty ground truth");
    if (pred.empty()) return 0.0;
    const double thres = kind == IouKind::Em ? thresholds.thres_em : thresholds.thres_min;
    std::size_t hit = 0;
    for (const NormBox& g : gt)
        if (best_iou(g, pred, kind) >= thres) ++hit;
    return static_cast<double>(hit) / static_cast<double>(gt.size());
}

double box_set_precision_min(const std::vector<NormBox>& gt,
                             const std::vector<NormBox>& pred,
                             const MatchThresholds& thresholds) {
    if (pred.empty()) throw EmptyPrediction("precision undefined for empty prediction");
    if (gt.empty()) return 0.0;
    std::size_t hit = 0;
    for (const NormBox& p : pred)
        if (best_iou(p, gt, IouKind::Min) >= thresholds.thres_min) ++hit;
    return static_cast<double>(hit) / static_cast<double>(pred.size());
}

double f1_min(double recall_min, double precision_min) {
    const double denom = recall_min + precision_min;
    if (denom == 0.0) return 0.0;
    return 2.0 * precision_min * recall_min / denom;
}

TrajectoryScore trajectory_score(const std::vector<NormBox>& gt,
                                 const std::vector<NormBox>& pred,
                                 const MatchThresholds& thresholds) {
    const double r_min = box_set_recall(gt, pred, IouKind::Min, thresholds);
    const double r_em = box_set_recall(gt, pred, IouKind::Em, thresholds);
    return TrajectoryScore{r_min + r_em, (r_min + r_em) / 2.0};
}

BoxSetReport box_set_report(const std::vector<NormBox>& gt,
                            const std::vector<NormBox>& pred,
                            const MatchThresholds& thresholds) {
    BoxSetReport report;
    if (!gt.empty() && !pred.empty()) {
        report.recall_min = box_set_recall(gt, pred, IouKind::Min, thresholds);
        report.recall_em = box_set_recall(gt, pred, IouKind::Em, thresholds);
        report.precision_min = box_set_precision_min(gt, pred, thresholds);
        for (std::size_t i = 0; i < gt.size(); ++i)
            if (best_iou(gt[i], pred, IouKind::Min) >= thresholds.thres_min)
                report.matched_gt_indices.push_back(i);
        for (std::size_t j = 0; j < pred.size(); ++j)
            if (best_iou(pred[j], gt, IouKind::Min) >= thresholds.thres_min)
                report.matched_pred_indices.push_back(j);
    }
    report.f1_min = f1_min(report.recall_min, report.precision_min);
    return report;
}

double page_accuracy(const std::vector<PageJudgment>& judgments) {
    if (judgments.empty()) throw EmptyJudgmentSet("no pages to judge");
    std::size_t agree = 0;
    for (const PageJudgment& j : judgments)
        if (j.expected_relevant == j.predicted_relevant) ++agree;
    return static_cast<double>(agree) / static_cast<double>(judgments.size());
}

}  // namespace docex
