#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fsfm/error.hpp"
#include "fsfm/forgetting.hpp"
#include "oracle.hpp"

using namespace fsfm;

namespace {

constexpr Timestamp kNow = Timestamp::from_seconds(1'700'000'000);

MemoryRecord stored(std::string id, std::string content, Category c, ToolTag tool, std::int64_t age_s,
                    std::optional<std::string> user = std::nullopt) {
    MemoryRecord r;
    r.id = std::move(id);
    r.content = std::move(content);
    r.category = c;
    r.tool_tag = tool;
    r.created_at = r.last_accessed_at = Timestamp{kNow.ms - age_s * 1000};
    r.layer = Layer::LongTerm;
    r.user_id = std::move(user);
    r.score = default_scorer().score(r, PolicyConfig{}, kNow);
    return r;
}

}  // namespace

TEST_SUITE("forgetting") {

TEST_CASE("policy names round trip") {
    for (auto p : {ForgetPolicy::PassiveDecay, ForgetPolicy::ActiveDeletion, ForgetPolicy::SafetyTriggered,
                   ForgetPolicy::UserRequested, ForgetPolicy::CapacityPrune, ForgetPolicy::RandomBaseline,
                   ForgetPolicy::OldFirstBaseline}) {
        CHECK(parse_forget_policy(to_string(p)) == p);
    }
    const ForgetDecision d{"x", ForgetPolicy::SafetyTriggered, -10.0, kNow, "dangerous_content"};
    CHECK(decision_from_json(to_json(d)) == d);
}

TEST_CASE("forget set: lowest importance, then oldest, then id") {
    const std::vector<ScoredId> s = {
        {"c", 1.0, Timestamp{5}}, {"a", 1.0, Timestamp{5}}, {"b", 1.0, Timestamp{3}},
        {"d", -10.0, Timestamp{9}}, {"e", 2.0, Timestamp{1}},
    };
    CHECK(select_forget_set(s, 5).empty());
    CHECK(select_forget_set(s, 4) == std::vector<std::string>{"d"});
    CHECK(select_forget_set(s, 1) == std::vector<std::string>{"d", "b", "a", "c"});
    CHECK(select_forget_set(s, 0).size() == 5);
}

TEST_CASE("prune budget") {
    PolicyConfig c;
    c.capacity = 1000;
    CHECK(prune_budget(700, c) == 0);
    CHECK(prune_budget(701, c) == 70);   // floor(0.1 * 701)
    CHECK(prune_budget(900, c) == 200);  // overflow exceeds the batch fraction
    c.capacity = 10;
    CHECK(prune_budget(8, c) == 1);
}

TEST_CASE("capacity prune removes dangerous records first") {
    PolicyConfig c;
    c.capacity = 4;
    std::vector<MemoryRecord> view = {
        stored("a", "Plan B: 20GB data for ¥58 per month, valid 30 days.", Category::Important,
               ToolTag::KnowledgeBaseQA, 100),
        stored("b", "open the billing page", Category::General, ToolTag::PageNavigation, 50),
        stored("c", "[unsafe:criminal_planning] forged invoice", Category::General, ToolTag::Unknown, 10),
        stored("d", "Upgrade costs $30.", Category::Medium, ToolTag::StandardQuery, 20),
    };
    const auto out = capacity_prune(view, c, kNow);
    REQUIRE(out.forgotten.size() == 2);
    CHECK(out.forgotten[0].record_id == "c");
    CHECK(out.forgotten[0].reason == "dangerous_lowest_priority");
    CHECK(out.forgotten[1].record_id == "b");
    CHECK(out.forgotten[1].reason == "lowest_importance");
    CHECK(out.retained_count == 2);
    CHECK(out.capacity_after == 0.5);
    CHECK(out.rescored.size() == 4);
    const auto cached = capacity_prune_cached(view, c, kNow);
    CHECK(cached.forgotten == out.forgotten);
}

TEST_CASE("prune is a no-op under the cap") {
    PolicyConfig c;
    c.capacity = 100;
    std::vector<MemoryRecord> view = {stored("a", "x", Category::General, ToolTag::Unknown, 1)};
    CHECK(capacity_prune(view, c, kNow).forgotten.empty());
}

TEST_CASE("safety purge and sensitive expiry") {
    std::vector<MemoryRecord> view = {
        stored("a", "[unsafe:guns_illegal_weapons] assembly", Category::General, ToolTag::Unknown, 1),
        stored("b", "call 13812345678", Category::Sensitive, ToolTag::SimpleLookup, 86400 * 40),
        stored("c", "hello", Category::General, ToolTag::Unknown, 1),
    };
    const auto purged = safety_purge(view, kNow);
    REQUIRE(purged.size() == 1);
    CHECK(purged[0].record_id == "a");
    CHECK(purged[0].policy == ForgetPolicy::SafetyTriggered);

    PolicyConfig c;
    CHECK(expire_sensitive(view, c, kNow).empty());
    c.sensitive_retention_days = 30;
    const auto expired = expire_sensitive(view, c, kNow);
    REQUIRE(expired.size() == 1);
    CHECK(expired[0].record_id == "b");
    CHECK(expired[0].policy == ForgetPolicy::ActiveDeletion);
    CHECK(expired[0].reason == "retention_period_expired");
}

TEST_CASE("user requested deletion") {
    std::vector<MemoryRecord> view;
    for (int i = 0; i < 7; ++i) {
        view.push_back(stored("r" + std::to_string(i), "note " + std::to_string(i), Category::Medium,
                              ToolTag::StandardQuery, 10, i < 5 ? "U1" : "U2"));
    }
    const auto out = user_requested_delete(view, "U1", kNow);
    CHECK(out.decisions.size() == 5);
    CHECK_FALSE(out.unknown_user);
    for (const auto& d : out.decisions) CHECK(d.policy == ForgetPolicy::UserRequested);
    CHECK(user_requested_delete(view, "U9", kNow).unknown_user);
    CHECK_THROWS_AS(user_requested_delete(view, "", kNow), Error);
}

TEST_CASE("reinforcement bumps frequency and recency") {
    const PolicyConfig c;
    const auto r = stored("a", "Upgrade costs $30.", Category::Medium, ToolTag::StandardQuery, 86400 * 5);
    const auto later = Timestamp{kNow.ms + 1000};
    const auto out = reinforce(r, ReinforcementSignal{0.5, 0.5, 0.5, 0.5, true}, c, later);
    CHECK(out.usage_frequency == 2);
    CHECK(out.last_accessed_at == later);
    CHECK(out.score.trs == 2.0);
    CHECK(out.score.importance > r.score.importance);
    CHECK_THROWS_AS(reinforce(r, ReinforcementSignal{2.0, 0, 0, 0, true}, c, later), Error);
    CHECK_THROWS_AS(reinforce(r, ReinforcementSignal{}, c, Timestamp{0}), Error);
}

TEST_CASE("baselines") {
    std::vector<std::string> ids;
    std::vector<MemoryRecord> records;
    for (int i = 0; i < 20; ++i) {
        ids.push_back("r" + std::to_string(i));
        records.push_back(stored(ids.back(), "x" + std::to_string(i), Category::General, ToolTag::Unknown, 100 - i));
    }
    const auto a = select_random_baseline(ids, 5, 1);
    CHECK(a.size() == 5);
    CHECK(a == select_random_baseline(ids, 5, 1));
    CHECK(a != select_random_baseline(ids, 5, 2));
    CHECK(std::set<std::string>(a.begin(), a.end()).size() == 5);
    CHECK_THROWS_AS(select_random_baseline(ids, 21, 1), Error);

    const auto old = select_old_first_baseline(records, 3);
    CHECK(old == std::vector<std::string>{"r0", "r1", "r2"});
    CHECK_THROWS_AS(select_old_first_baseline(records, 21), Error);
}

TEST_CASE("property: forget set equals the exhaustive oracle") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        auto items = testing::random_instance(rng, 12);
        std::uniform_int_distribution<std::int64_t> keep(0, static_cast<std::int64_t>(items.size()));
        const auto retain = keep(rng);
        CHECK(select_forget_set(items, retain) == testing::brute_force_forget_set(items, retain));
    }
}

TEST_CASE("property: dangerous records always leave before anything else") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        auto items = testing::random_instance(rng, 20);
        const auto dangerous = std::count_if(items.begin(), items.end(), [](auto& s) { return s.importance == -10.0; });
        const auto forget = select_forget_set(items, static_cast<std::int64_t>(items.size()) - dangerous);
        CHECK(static_cast<long>(forget.size()) == dangerous);
        for (const auto& id : forget) {
            const auto it = std::find_if(items.begin(), items.end(), [&](auto& s) { return s.id == id; });
            CHECK(it->importance == -10.0);
        }
    }
}

}  // TEST_SUITE
