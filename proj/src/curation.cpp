#include "docex/curation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace docex {

using nlohmann::json;

std::vector<TrajectoryCandidate> filter_trajectories(
    std::vector<TrajectoryCandidate> candidates, std::size_t keep,
    const MatchThresholds& thresholds, double recall_min_floor) {
    struct Scored {
        TrajectoryCandidate candidate;
        double recall_min;
    };
    std::vector<Scored> survivors;
    for (TrajectoryCandidate& c : candidates) {
        if (c.gt_boxes.empty()) continue;  // positives only
        const double r_min = c.pred_boxes.empty()
                                 ? 0.0
                                 : box_set_recall(c.gt_boxes, c.pred_boxes,
                                                  IouKind::Min, thresholds);
        if (r_min < recall_min_floor) continue;
        const double r_em = c.pred_boxes.empty()
                                ? 0.0
                                : box_set_recall(c.gt_boxes, c.pred_boxes, IouKind::Em,
                                                 thresholds);
        c.score = TrajectoryScore{r_min + r_em, (r_min + r_em) / 2.0};
        survivors.push_back(Scored{std::move(c), r_min});
    }
    std::sort(survivors.begin(), survivors.end(), [](const Scored& a, const Scored& b) {
        if (a.candidate.score.sum_score != b.candidate.score.sum_score)
            return a.candidate.score.sum_score > b.candidate.score.sum_score;
        return a.candidate.id < b.candidate.id;
    });

    std::vector<TrajectoryCandidate> out;
    out.reserve(std::min(keep, survivors.size()));
    for (Scored& s : survivors) {
        if (out.size() == keep) break;
        out.push_back(std::move(s.candidate));
    }
    return out;
}

ScriptedVerifier::ScriptedVerifier(std::vector<std::string> rejected_pages)
    : rejected_(std::move(rejected_pages)) {}

bool ScriptedVerifier::verify(const NegativeCandidate& candidate) {
    return std::find(rejected_.begin(), rejected_.end(), candidate.page_ref) ==
           rejected_.end();
}

std::vector<NegativeCandidate> mine_negatives(const std::string& query_id,
                                              const std::vector<ScoredPage>& scored_pages,
                                              NegativeVerifier& verifier,
                                              const ScoreBand& band) {
    std::vector<NegativeCandidate> out;
    for (const ScoredPage& page : scored_pages) {
        if (page.relevance_score < band.low || page.relevance_score > band.high)
            continue;
        NegativeCandidate candidate{query_id, page.page_ref, page.relevance_score, false};
        if (!verifier.verify(candidate)) continue;
        candidate.verified_negative = true;
        out.push_back(std::move(candidate));
    }
    return out;
}

double population_std(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    double acc = 0.0;
    for (const double v : values) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / values.size());
}

namespace {

void check_rollout_count(const RolloutScores& sample, std::size_t expected) {
    if (sample.mean_scores.size() != expected)
        throw WrongRolloutCount("sample " + sample.sample_id + " has " +
                                std::to_string(sample.mean_scores.size()) +
                                " rollouts, expected " + std::to_string(expected));
}

}  // namespace

std::vector<std::string> uncertainty_filter(const std::vector<RolloutScores>& samples,
                                            double std_floor,
                                            std::size_t rollouts_per_sample) {
    std::vector<std::string> retained;
    for (const RolloutScores& sample : samples) {
        check_rollout_count(sample, rollouts_per_sample);
        if (population_std(sample.mean_scores) >= std_floor)
            retained.push_back(sample.sample_id);
    }
    return retained;
}

std::vector<std::string> uncertainty_filter_top_fraction(
    const std::vector<RolloutScores>& samples, double fraction,
    std::size_t rollouts_per_sample) {
    struct Ranked {
        std::size_t index;
        double std_dev;
    };
    std::vector<Ranked> ranked;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        check_rollout_count(samples[i], rollouts_per_sample);
        ranked.push_back(Ranked{i, population_std(samples[i].mean_scores)});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        return a.std_dev > b.std_dev;
    });
    const auto quota = static_cast<std::size_t>(
        std::lround(fraction * static_cast<double>(samples.size())));
    ranked.resize(std::min(quota, ranked.size()));
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        return a.index < b.index;
    });
    std::vector<std::string> retained;
    for (const Ranked& r : ranked) retained.push_back(samples[r.index].sample_id);
    return retained;
}

DatasetManifest manifest(std::size_t positives, std::size_t negatives,
                         double target_negative_share, double margin) {
    DatasetManifest out;
    out.positive_count = positives;
    out.negative_count = negatives;
    const std::size_t g = std::gcd(positives, negatives);
    out.ratio_positive = g ? positives / g : positives;
    out.ratio_negative = g ? negatives / g : negatives;
    const std::size_t total = positives + negatives;
    out.negative_share =
        total ? static_cast<double>(negatives) / static_cast<double>(total) : 0.0;
    out.share_warning =
        std::abs(out.negative_share - target_negative_share) > margin;
    return out;
}

json sft_export(const TrajectoryCandidate& candidate) {
    json turns = json::array();
    for (const AgentTurn& turn : candidate.trajectory) {
        json t = turn_to_json(turn);
        t["assistant_generated"] = turn.role == Role::Assistant;
        turns.push_back(std::move(t));
    }
    json gt = json::array();
    for (const NormBox& b : candidate.gt_boxes)
        gt.push_back({b.x_min, b.y_min, b.x_max, b.y_max});
    return json{{"id", candidate.id},
                {"gt_boxes", std::move(gt)},
                {"sum_score", candidate.score.sum_score},
                {"turns", std::move(turns)}};
}

}  // namespace docex
