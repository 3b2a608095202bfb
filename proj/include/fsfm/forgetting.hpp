#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsfm/config.hpp"
#include "fsfm/scoring.hpp"
#include "fsfm/types.hpp"

namespace fsfm {

enum class ForgetPolicy {
    PassiveDecay,
    ActiveDeletion,
    SafetyTriggered,
    UserRequested,
    CapacityPrune,
    RandomBaseline,
    OldFirstBaseline,
};

std::string_view to_string(ForgetPolicy p);
ForgetPolicy parse_forget_policy(std::string_view s);

/// One executed forget action, as written to the audit log.
struct ForgetDecision {
    std::string record_id;
    ForgetPolicy policy = ForgetPolicy::CapacityPrune;
    double importance_at_decision = 0.0;
    Timestamp decided_at;
    std::string reason;

    friend bool operator==(const ForgetDecision&, const ForgetDecision&) = default;
};

nlohmann::json to_json(const ForgetDecision& d);
ForgetDecision decision_from_json(const nlohmann::json& j);

struct ScoredId {
    std::string id;
    double importance = 0.0;
    Timestamp created_at;
};

/// Strict weak order used for every removal decision: lower importance first, then
/// older created_at, then lexicographically smaller id.
bool forgets_before(const ScoredId& a, const ScoredId& b);

/// Ids of the |scores| - retain_limit entries that come first under `forgets_before`,
/// in removal order. Empty when the constraint already holds. The kept set has the
/// largest possible total importance among all sets of size retain_limit.
std::vector<std::string> select_forget_set(std::span<const ScoredId> scores, std::int64_t retain_limit);

struct PruneOutcome {
    std::vector<ForgetDecision> forgotten;
    std::int64_t retained_count = 0;
    double capacity_after = 0.0;  // retained_count / capacity
    /// Fresh breakdown for every input record, aligned with the input view.
    std::vector<ScoreBreakdown> rescored;
};

/// Number of records a prune cycle removes from `count`: zero at or under the cap,
/// otherwise max(overflow, floor(prune_fraction * count)).
std::int64_t prune_budget(std::int64_t count, const PolicyConfig& config);

/// Rescores every record at `now` and, if the view exceeds the cap, forgets
/// prune_budget() lowest-importance records.
PruneOutcome capacity_prune(std::span<const MemoryRecord> view, const PolicyConfig& config, Timestamp now,
                            const Scorer& scorer = default_scorer());

/// As capacity_prune, but rescoring reuses each record's stored content scores and only
/// refreshes the temporal dimension (see refresh_temporal).
PruneOutcome capacity_prune_cached(std::span<const MemoryRecord> view, const PolicyConfig& config, Timestamp now);

/// Every record whose security score is the dangerous penalty, regardless of capacity.
std::vector<ForgetDecision> safety_purge(std::span<const MemoryRecord> view, Timestamp now);

/// Sensitive records older than config.sensitive_retention_days (no-op when that is 0).
std::vector<ForgetDecision> expire_sensitive(std::span<const MemoryRecord> view, const PolicyConfig& config,
                                             Timestamp now);

struct UserDeleteResult {
    std::vector<ForgetDecision> decisions;
    bool unknown_user = false;  // no record matched
};

/// Right-to-be-forgotten deletion. Throws Error{InvalidArgument} on an empty user id.
UserDeleteResult user_requested_delete(std::span<const MemoryRecord> view, std::string_view user_id,
                                       Timestamp now);

/// Counts one more access at `now` and refreshes the score.
/// Throws Error{InvalidArgument} for out-of-range signals and Error{NegativeElapsedTime}
/// if `now` precedes the last access.
MemoryRecord reinforce(MemoryRecord record, const ReinforcementSignal& signal, const PolicyConfig& config,
                       Timestamp now, const Scorer& scorer = default_scorer());

/// k ids sampled uniformly without replacement. Throws Error{KTooLarge}.
std::vector<std::string> select_random_baseline(std::span<const std::string> ids, std::int64_t k,
                                                std::uint64_t seed);

/// The k records with the smallest created_at, ties by id. Throws Error{KTooLarge}.
std::vector<std::string> select_old_first_baseline(std::span<const MemoryRecord> records, std::int64_t k);

}  // namespace fsfm
