#include "docex/reward.hpp"

#include <algorithm>

namespace docex {

double escalation_penalty(std::size_t count) {
    if (count == 0) return 0.0;
    if (count == 1) return 0.05;
    if (count == 2) return 0.20;
    return 0.30;
}

std::size_t count_spurious(const std::vector<NormBox>& pred,
                           const std::vector<NormBox>& gt, const RewardConfig& config) {
    std::size_t spurious = 0;
    for (const NormBox& p : pred) {
        double best = 0.0;
        for (const NormBox& g : gt) best = std::max(best, iou_min(p, g));
        if (best < config.spurious_match_floor) ++spurious;
    }
    return spurious;
}

std::size_t count_redundant(const std::vector<NormBox>& pred, const RewardConfig& config) {
    std::vector<const NormBox*> kept;
    std::size_t redundant = 0;
    for (const NormBox& p : pred) {
        const bool overlaps_kept =
            std::any_of(kept.begin(), kept.end(), [&](const NormBox* k) {
                return iou_em(p, *k) >= config.redundant_overlap_floor;
            });
        if (overlaps_kept)
            ++redundant;
        else
            kept.push_back(&p);
    }
    return redundant;
}

RewardBreakdown positive_reward(const std::vector<NormBox>& gt,
                                const std::vector<NormBox>& pred,
                                const std::vector<ToolCall>& tool_calls,
                                const RewardConfig& config) {
    if (gt.empty())
        throw NotPositiveSample("positive reward requires ground-truth boxes");

    RewardBreakdown out;
    if (!pred.empty())
        out.accuracy = trajectory_score(gt, pred, config.thresholds).mean_score;
    out.p_over_pred = escalation_penalty(count_spurious(pred, gt, config));
    out.p_overlap = escalation_penalty(count_redundant(pred, config));

    constexpr double kPageArea = static_cast<double>(kGridMax) * kGridMax;
    const bool oversized_region_call =
        std::any_of(tool_calls.begin(), tool_calls.end(), [&](const ToolCall& call) {
            return call.element_type == ElementType::Region &&
                   static_cast<double>(call.box.area()) >
                       config.oversized_area_fraction * kPageArea;
        });
    if (oversized_region_call) out.p_oversized = config.oversized_penalty;

    out.total = out.accuracy - out.p_over_pred - out.p_overlap - out.p_oversized;
    return out;
}

int negative_reward(const std::vector<NormBox>& pred) {
    return pred.empty() ? 1 : 0;
}

}  // namespace docex
