#include "fsfm/forgetting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "fsfm/error.hpp"

namespace fsfm {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<ForgetPolicy, std::string_view>, 7> kPolicyNames{{
    {ForgetPolicy::PassiveDecay, "PassiveDecay"},
    {ForgetPolicy::ActiveDeletion, "ActiveDeletion"},
    {ForgetPolicy::SafetyTriggered, "SafetyTriggered"},
    {ForgetPolicy::UserRequested, "UserRequested"},
    {ForgetPolicy::CapacityPrune, "CapacityPrune"},
    {ForgetPolicy::RandomBaseline, "RandomBaseline"},
    {ForgetPolicy::OldFirstBaseline, "OldFirstBaseline"},
}};

ForgetDecision decide(const MemoryRecord& r, ForgetPolicy policy, Timestamp now, std::string reason) {
    return {r.id, policy, r.score.importance, now, std::move(reason)};
}

}  // namespace

std::string_view to_string(ForgetPolicy p) {
    for (const auto& [v, name] : kPolicyNames) {
        if (v == p) return name;
    }
    return "?";
}

ForgetPolicy parse_forget_policy(std::string_view s) {
    for (const auto& [v, name] : kPolicyNames) {
        if (name == s) return v;
    }
    throw Error(ErrorCode::MalformedRecord, "unknown forget policy '" + std::string(s) + "'");
}

json to_json(const ForgetDecision& d) {
    return json{{"record_id", d.record_id},
                {"policy", to_string(d.policy)},
                {"importance_at_decision", d.importance_at_decision},
                {"decided_at", d.decided_at.ms % 1000 == 0 ? json(d.decided_at.ms / 1000) : json(d.decided_at.seconds())},
                {"reason", d.reason}};
}

ForgetDecision decision_from_json(const json& j) {
    try {
        return {j.at("record_id").get<std::string>(), parse_forget_policy(j.at("policy").get<std::string>()),
                j.at("importance_at_decision").get<double>(),
                Timestamp::from_fractional_seconds(j.at("decided_at").get<double>()),
                j.at("reason").get<std::string>()};
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, std::string("audit entry: ") + e.what());
    }
}

bool forgets_before(const ScoredId& a, const ScoredId& b) {
    if (a.importance != b.importance) return a.importance < b.importance;
    if (a.created_at != b.created_at) return a.created_at < b.created_at;
    return a.id < b.id;
}

std::vector<std::string> select_forget_set(std::span<const ScoredId> scores, std::int64_t retain_limit) {
    if (retain_limit < 0) throw Error(ErrorCode::InvalidArgument, "retain limit must be >= 0");
    const auto total = static_cast<std::int64_t>(scores.size());
    if (total <= retain_limit) return {};
    const auto k = static_cast<std::size_t>(total - retain_limit);

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto cmp = [&](std::size_t a, std::size_t b) { return forgets_before(scores[a], scores[b]); };
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1), order.end(), cmp);
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), cmp);

    std::vector<std::string> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(scores[order[i]].id);
    return out;
}

std::int64_t prune_budget(std::int64_t count, const PolicyConfig& config) {
    const std::int64_t limit = config.retain_limit();
    if (count <= limit) return 0;
    const auto floor_batch =
        static_cast<std::int64_t>(std::floor(config.prune_fraction * static_cast<double>(count) + 1e-9));
    return std::min(count, std::max(count - limit, floor_batch));
}

namespace {

template <typename Rescore>
PruneOutcome prune_with(std::span<const MemoryRecord> view, const PolicyConfig& config, Timestamp now,
                        Rescore&& rescore) {
    PruneOutcome out;
    const auto count = static_cast<std::int64_t>(view.size());
    out.rescored.reserve(view.size());
    for (const auto& r : view) out.rescored.push_back(rescore(r));

    const std::int64_t budget = prune_budget(count, config);
    if (budget > 0) {
        std::vector<ScoredId> scored;
        scored.reserve(view.size());
        for (std::size_t i = 0; i < view.size(); ++i) {
            scored.push_back({view[i].id, out.rescored[i].importance, view[i].created_at});
        }
        const auto forget = select_forget_set(scored, count - budget);

        std::unordered_map<std::string_view, std::size_t> index;
        index.reserve(view.size());
        for (std::size_t i = 0; i < view.size(); ++i) index.emplace(view[i].id, i);
        out.forgotten.reserve(forget.size());
        for (const auto& id : forget) {
            const std::size_t i = index.at(id);
            out.forgotten.push_back({id, ForgetPolicy::CapacityPrune, out.rescored[i].importance, now,
                                     out.rescored[i].src <= kDangerousPenalty ? "dangerous_lowest_priority"
                                                                              : "lowest_importance"});
        }
    }
    out.retained_count = count - static_cast<std::int64_t>(out.forgotten.size());
    out.capacity_after = static_cast<double>(out.retained_count) / static_cast<double>(config.capacity);
    return out;
}

}  // namespace

PruneOutcome capacity_prune(std::span<const MemoryRecord> view, const PolicyConfig& config, Timestamp now,
                            const Scorer& scorer) {
    return prune_with(view, config, now, [&](const MemoryRecord& r) { return scorer.score(r, config, now); });
}

PruneOutcome capacity_prune_cached(std::span<const MemoryRecord> view, const PolicyConfig& config, Timestamp now) {
    return prune_with(view, config, now, [&](const MemoryRecord& r) { return refresh_temporal(r, config, now); });
}

std::vector<ForgetDecision> safety_purge(std::span<const MemoryRecord> view, Timestamp now) {
    std::vector<ForgetDecision> out;
    for (const auto& r : view) {
        if (r.score.src <= kDangerousPenalty) out.push_back(decide(r, ForgetPolicy::SafetyTriggered, now, "dangerous_content"));
    }
    return out;
}

std::vector<ForgetDecision> expire_sensitive(std::span<const MemoryRecord> view, const PolicyConfig& config,
                                             Timestamp now) {
    std::vector<ForgetDecision> out;
    if (config.sensitive_retention_days <= 0.0) return out;
    for (const auto& r : view) {
        if (r.category == Category::Sensitive && days_between(r.created_at, now) > config.sensitive_retention_days) {
            out.push_back(decide(r, ForgetPolicy::ActiveDeletion, now, "retention_period_expired"));
        }
    }
    return out;
}

UserDeleteResult user_requested_delete(std::span<const MemoryRecord> view, std::string_view user_id, Timestamp now) {
    if (user_id.empty()) throw Error(ErrorCode::InvalidArgument, "user id must be non-empty");
    UserDeleteResult out;
    for (const auto& r : view) {
        if (r.user_id && *r.user_id == user_id) {
            out.decisions.push_back(decide(r, ForgetPolicy::UserRequested, now, "right_to_be_forgotten"));
        }
    }
    out.unknown_user = out.decisions.empty();
    return out;
}

MemoryRecord reinforce(MemoryRecord record, const ReinforcementSignal& signal, const PolicyConfig& config,
                       Timestamp now, const Scorer& scorer) {
    if (!signal.in_range()) throw Error(ErrorCode::InvalidArgument, "reinforcement signal out of range");
    if (now < record.last_accessed_at) {
        throw Error(ErrorCode::NegativeElapsedTime, "reinforcement precedes last access");
    }
    record.usage_frequency += 1;
    record.last_accessed_at = now;
    record.score = scorer.score(record, config, now);
    return record;
}

std::vector<std::string> select_random_baseline(std::span<const std::string> ids, std::int64_t k, std::uint64_t seed) {
    if (k < 0 || k > static_cast<std::int64_t>(ids.size())) {
        throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " exceeds " + std::to_string(ids.size()));
    }
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(k));
    std::mt19937_64 rng(seed);
    std::sample(ids.begin(), ids.end(), std::back_inserter(out), k, rng);
    return out;
}

std::vector<std::string> select_old_first_baseline(std::span<const MemoryRecord> records, std::int64_t k) {
    if (k < 0 || k > static_cast<std::int64_t>(records.size())) {
        throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " exceeds " + std::to_string(records.size()));
    }
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto older = [&](std::size_t a, std::size_t b) {
        if (records[a].created_at != records[b].created_at) return records[a].created_at < records[b].created_at;
        return records[a].id < records[b].id;
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), older);
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(k));
    for (std::int64_t i = 0; i < k; ++i) out.push_back(records[order[static_cast<std::size_t>(i)]].id);
    return out;
}

}  // namespace fsfm
