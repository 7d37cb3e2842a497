#pragma once

#include <map>
#include <string>
#include <vector>

#include "docex/agent.hpp"
#include "docex/metrics.hpp"

namespace docex {

struct VerifierUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct WrongRolloutCount : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct TrajectoryCandidate {
    std::string id;
    std::vector<AgentTurn> trajectory;
    std::vector<NormBox> pred_boxes;  // from the final evidence list
    std::vector<NormBox> gt_boxes;
    TrajectoryScore score;  // filled by filter_trajectories
};

/// Drop candidates with Recall_min below the coverage floor, rank the rest by
/// sum score (precision tie-broken by candidate id), return the first `keep`.
std::vector<TrajectoryCandidate> filter_trajectories(
    std::vector<TrajectoryCandidate> candidates, std::size_t keep,
    const MatchThresholds& thresholds = {}, double recall_min_floor = 0.8);

struct ScoredPage {
    std::string page_ref;
    double relevance_score = 0.0;
};

struct NegativeCandidate {
    std::string query_id;
    std::string page_ref;
    double relevance_score = 0.0;
    bool verified_negative = false;
};

class NegativeVerifier {
public:
    virtual ~NegativeVerifier() = default;
    /// True when the page really contains no query-relevant evidence.
    virtual bool verify(const NegativeCandidate& candidate) = 0;
};

/// Test double: rejects the configured page refs, verifies everything else.
class ScriptedVerifier : public NegativeVerifier {
public:
    explicit ScriptedVerifier(std::vector<std::string> rejected_pages = {});
    bool verify(const NegativeCandidate& candidate) override;

private:
    std::vector<std::string> rejected_;
};

struct ScoreBand {
    double low = 0.05;
    double high = 0.30;  // both ends inclusive
};

/// Keep reranker hits inside the hard-negative score band, then drop any the
/// verifier flags as false negatives.
std::vector<NegativeCandidate> mine_negatives(const std::string& query_id,
                                              const std::vector<ScoredPage>& scored_pages,
                                              NegativeVerifier& verifier,
                                              const ScoreBand& band = {});

struct RolloutScores {
    std::string sample_id;
    std::vector<double> mean_scores;  // exactly rollouts_per_sample entries
};

inline constexpr std::size_t kRolloutsPerSample = 8;

double population_std(const std::vector<double>& values);

/// Retain samples whose population standard deviation over the rollout scores
/// clears the floor. Input order is preserved.
std::vector<std::string> uncertainty_filter(const std::vector<RolloutScores>& samples,
                                            double std_floor,
                                            std::size_t rollouts_per_sample =
                                                kRolloutsPerSample);

/// Alternative selection mode: retain the top fraction of samples by rollout
/// standard deviation (ties kept in input order).
std::vector<std::string> uncertainty_filter_top_fraction(
    const std::vector<RolloutScores>& samples, double fraction,
    std::size_t rollouts_per_sample = kRolloutsPerSample);

struct DatasetManifest {
    std::size_t positive_count = 0;
    std::size_t negative_count = 0;
    std::size_t ratio_positive = 0;  // reduced
    std::size_t ratio_negative = 0;
    double negative_share = 0.0;
    bool share_warning = false;
};

DatasetManifest manifest(std::size_t positives, std::size_t negatives,
                         double target_negative_share = 0.23, double margin = 0.05);

/// SFT-ready export: ordered turns with role tags, marking which turns are
/// assistant-generated so a trainer can mask the rest.
nlohmann::json sft_export(const TrajectoryCandidate& candidate);

}  // namespace docex
