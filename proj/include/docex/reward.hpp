#pragma once

#include <vector>

#include "docex/metrics.hpp"
#include "docex/tool_call.hpp"

namespace docex {

struct NotPositiveSample : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct RewardConfig {
    // A pred box is spurious when its max IoU_min against gt stays below this.
    double spurious_match_floor = 0.5;
    // Two pred boxes are redundant when their pairwise IoU_EM reaches this.
    double redundant_overlap_floor = 0.5;
    double oversized_area_fraction = 0.85;
    double oversized_penalty = 0.10;
    MatchThresholds thresholds;
};

/// Escalating penalty keyed on offending-box count: 0, 0.05, 0.20, then 0.30
/// for three or more.
double escalation_penalty(std::size_t count);

struct RewardBreakdown {
    double accuracy = 0.0;
    double p_over_pred = 0.0;
    double p_overlap = 0.0;
    double p_oversized = 0.0;
    double total = 0.0;  // accuracy - penalties, unclamped
};

/// Pred boxes whose best IoU_min against every gt box is strictly below the
/// spurious floor. Empty gt makes every pred box spurious.
std::size_t count_spurious(const std::vector<NormBox>& pred,
                           const std::vector<NormBox>& gt, const RewardConfig& config);

/// Greedy sweep in list order; a box is redundant when it overlaps an earlier
/// kept box at or above the redundancy floor under IoU_EM.
std::size_t count_redundant(const std::vector<NormBox>& pred, const RewardConfig& config);

/// Rollout reward for a positive sample: dual-recall accuracy minus the three
/// behavioral penalties. The oversized penalty applies once per rollout when
/// any region-mode call covers more than the configured page-area fraction.
RewardBreakdown positive_reward(const std::vector<NormBox>& gt,
                                const std::vector<NormBox>& pred,
                                const std::vector<ToolCall>& tool_calls,
                                const RewardConfig& config);

/// Binary reward for a negative sample: 1 iff no boxes were predicted.
int negative_reward(const std::vector<NormBox>& pred);

}  // namespace docex
