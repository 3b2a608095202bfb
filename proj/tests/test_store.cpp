#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "fsfm/corpus.hpp"
#include "fsfm/error.hpp"
#include "fsfm/memory_store.hpp"

using namespace fsfm;
namespace fs = std::filesystem;

namespace {

constexpr Timestamp kNow = Timestamp::from_seconds(1'700'000'000);

RecordDraft draft(std::string id, std::string content, std::optional<Category> c = std::nullopt,
                  ToolTag tool = ToolTag::KnowledgeBaseQA) {
    RecordDraft d;
    d.id = std::move(id);
    d.content = std::move(content);
    d.category = c;
    d.tool_tag = tool;
    return d;
}

RecordDraft rich(int i) {
    return draft("k" + std::to_string(1000 + i),
                 "Plan " + std::to_string(i) + ": 20GB data for ¥58 per month, valid 30 days, code " +
                     std::to_string(i * 31),
                 Category::Important);
}

fs::path temp_path(const std::string& name) {
    auto p = fs::temp_directory_path() / ("fsfm_store_" + name + "_" + std::to_string(::getpid()));
    fs::remove(p);
    return p;
}

PolicyConfig small_config(std::int64_t capacity) {
    PolicyConfig c;
    c.capacity = capacity;
    return c;
}

}  // namespace

TEST_SUITE("store") {

TEST_CASE("ingest consolidates clean records into long-term memory") {
    MemoryStore store(small_config(1000));
    std::vector<RecordDraft> batch;
    for (int i = 0; i < 20; ++i) batch.push_back(rich(i));
    const auto report = store.ingest_batch(batch, kNow);
    CHECK(report.accepted == 20);
    CHECK(report.purged == 0);
    CHECK(report.pruned == 0);
    CHECK(report.dropped == 0);
    const auto stats = store.usage_stats();
    CHECK(stats.longterm == 20);
    CHECK(stats.sensory == 0);
    CHECK(stats.working == 0);
    CHECK(stats.capacity_fraction == 0.02);
    CHECK(stats.bytes_estimate > 0);
}

TEST_CASE("dangerous drafts are purged at ingestion") {
    MemoryStore store(small_config(1000));
    std::vector<RecordDraft> batch = {rich(1), draft("bad", "[unsafe:guns_illegal_weapons] assembly guide", Category::Important)};
    const auto report = store.ingest_batch(batch, kNow);
    CHECK(report.purged == 1);
    CHECK_FALSE(store.get("bad").has_value());
    CHECK(store.get("k1001")->category == Category::Important);
    bool audited = false;
    for (const auto& d : store.audit().entries()) audited |= d.record_id == "bad" && d.policy == ForgetPolicy::SafetyTriggered;
    CHECK(audited);
}

TEST_CASE("retain mode keeps everything") {
    MemoryStore store(small_config(10));
    std::vector<RecordDraft> batch = {rich(1), draft("bad", "[unsafe:guns_illegal_weapons] assembly guide"),
                                      draft("g", "ok", Category::General, ToolTag::PageNavigation)};
    const auto report = store.ingest_batch(batch, kNow, IngestMode::Retain);
    CHECK(report.accepted == 3);
    CHECK(store.size() == 3);
    CHECK(store.get("bad")->category == Category::Dangerous);
}

TEST_CASE("malformed drafts are reported, not thrown") {
    MemoryStore store(small_config(100));
    RecordDraft future = rich(2);
    future.created_at = Timestamp{kNow.ms + 5000};
    std::vector<RecordDraft> batch = {rich(1), rich(1), draft("blank", "   "), future};
    const auto report = store.ingest_batch(batch, kNow);
    CHECK(report.accepted == 1);
    CHECK(report.malformed.size() == 3);
}

TEST_CASE("batch and backpressure limits") {
    PolicyConfig c = small_config(100);
    c.batch_size = 2;
    MemoryStore store(c);
    std::vector<RecordDraft> batch = {rich(1), rich(2), rich(3)};
    CHECK_THROWS_WITH_AS(store.ingest_batch(batch, kNow), doctest::Contains("batch size"), Error);

    c.batch_size = 100;
    c.memory_watermark_bytes = 1;
    MemoryStore tight(c);
    tight.ingest_batch(std::vector<RecordDraft>{rich(1)}, kNow);
    try {
        tight.ingest_batch(std::vector<RecordDraft>{rich(2)}, kNow);
        FAIL("expected backpressure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Backpressure);
    }
}

TEST_CASE("capacity cap holds after every batch") {
    const PolicyConfig c = small_config(200);
    MemoryStore store(c);
    CorpusSpec spec;
    spec.total = 1000;
    spec.seed = 5;
    const auto corpus = generate_corpus(spec);
    Timestamp now = Timestamp::from_seconds(0);
    for (const auto& d : corpus) now = std::max({now, *d.created_at, *d.last_accessed_at});
    for (std::size_t i = 0; i < corpus.size(); i += 100) {
        store.ingest_batch(std::span<const RecordDraft>(corpus.data() + i, 100), now);
        CHECK(store.usage_stats().longterm <= c.retain_limit());
        for (const auto& r : store.records()) CHECK(r.category != Category::Dangerous);
    }
}

TEST_CASE("layer transitions") {
    MemoryStore store(small_config(100));
    store.observe(rich(1), kNow);
    CHECK(store.get("k1001")->layer == Layer::Sensory);
    CHECK_THROWS_AS(store.promote("k1001", Layer::Sensory, Layer::LongTerm, kNow), Error);
    CHECK_THROWS_AS(store.promote("k1001", Layer::Working, Layer::LongTerm, kNow), Error);
    auto up = store.promote("k1001", Layer::Sensory, Layer::Working, kNow);
    REQUIRE(up.record);
    CHECK(up.record->layer == Layer::Working);
    up = store.promote("k1001", Layer::Working, Layer::LongTerm, kNow);
    REQUIRE(up.record);
    CHECK(up.record->layer == Layer::LongTerm);
    CHECK_THROWS_AS(store.promote("k1001", Layer::LongTerm, Layer::Working, kNow), Error);
}

TEST_CASE("sensory ttl") {
    MemoryStore store(small_config(100));
    store.observe(rich(1), kNow);
    store.observe(rich(2), kNow);
    const Timestamp late{kNow.ms + 61'000};
    const auto expired = store.promote("k1001", Layer::Sensory, Layer::Working, late);
    CHECK_FALSE(expired.record);
    REQUIRE(expired.decisions.size() == 1);
    CHECK(expired.decisions[0].reason == "sensory_ttl_expired");
    CHECK(store.expire_sensory(late).size() == 1);
    CHECK(store.size() == 0);
}

TEST_CASE("working memory overflow evicts the weakest") {
    PolicyConfig c = small_config(100);
    c.working_capacity = 2;
    MemoryStore store(c);
    store.observe(rich(1), kNow);
    store.observe(rich(2), kNow);
    store.observe(draft("weak", "hello there", Category::General, ToolTag::PageNavigation), kNow);
    store.promote("weak", Layer::Sensory, Layer::Working, kNow);
    store.promote("k1001", Layer::Sensory, Layer::Working, kNow);
    const auto third = store.promote("k1002", Layer::Sensory, Layer::Working, kNow);
    REQUIRE(third.decisions.size() == 1);
    CHECK(third.decisions[0].record_id == "weak");
    CHECK(store.usage_stats().working == 2);
}

TEST_CASE("weak or dangerous records are not consolidated") {
    MemoryStore store(small_config(100));
    store.observe(draft("weak", "hello there", Category::General, ToolTag::PageNavigation), kNow);
    store.promote("weak", Layer::Sensory, Layer::Working, kNow);
    const auto r = store.promote("weak", Layer::Working, Layer::LongTerm, kNow);
    CHECK_FALSE(r.record);
    CHECK(r.decisions[0].reason == "below_consolidation_threshold");
}

TEST_CASE("query returns the exact match first") {
    MemoryStore store(small_config(100));
    std::vector<RecordDraft> batch;
    for (int i = 0; i < 10; ++i) batch.push_back(rich(i));
    store.ingest_batch(batch, kNow);
    const auto hits = store.query(batch[3].content, 3).hits;
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].id == "k1003");
    CHECK(hits[0].similarity == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hits[0].similarity >= hits[1].similarity);
    CHECK(store.query("anything", 50).hits.size() == 10);
    CHECK_THROWS_AS(store.query("x", 0), Error);
    CHECK(MemoryStore(small_config(10)).query("x", 3).hits.empty());
}

TEST_CASE("access reinforces a stored record") {
    MemoryStore store(small_config(100));
    store.ingest_batch(std::vector<RecordDraft>{rich(1)}, kNow);
    const auto r = store.access("k1001", ReinforcementSignal{}, Timestamp{kNow.ms + 1000});
    REQUIRE(r);
    CHECK(r->usage_frequency == 2);
    CHECK_FALSE(store.access("missing", ReinforcementSignal{}, kNow).has_value());
}

TEST_CASE("user deletion and dangerous purge") {
    MemoryStore store(small_config(100));
    std::vector<RecordDraft> batch;
    for (int i = 0; i < 7; ++i) {
        batch.push_back(rich(i));
        batch.back().user_id = i < 5 ? "U1" : "U2";
    }
    store.ingest_batch(batch, kNow);
    CHECK(store.forget_user("U1", kNow).decisions.size() == 5);
    CHECK(store.size() == 2);
    CHECK(store.forget_user("U1", kNow).unknown_user);
    CHECK(store.purge_dangerous(kNow).empty());
}

TEST_CASE("snapshot round trip is state identical") {
    MemoryStore store(small_config(100));
    std::vector<RecordDraft> batch;
    for (int i = 0; i < 15; ++i) batch.push_back(rich(i));
    batch[4].user_id = "u7";
    store.ingest_batch(batch, kNow);
    const auto path = temp_path("roundtrip");
    CHECK(store.checkpoint(path, kNow) == 1);
    const auto restored = MemoryStore::restore(path);
    CHECK(restored.state_equals(store));
    CHECK(restored.records() == store.records());
    CHECK(restored.query(batch[2].content, 5).hits == store.query(batch[2].content, 5).hits);
    CHECK_FALSE(fs::exists(path.string() + ".tmp"));
    fs::remove(path);
}

TEST_CASE("corrupt snapshots are rejected") {
    MemoryStore store(small_config(100));
    store.ingest_batch(std::vector<RecordDraft>{rich(1), rich(2)}, kNow);
    const auto path = temp_path("corrupt");
    store.checkpoint(path, kNow);

    std::ifstream in(path);
    std::string header, first, second;
    std::getline(in, header);
    std::getline(in, first);
    std::getline(in, second);
    in.close();

    auto expect_corrupt = [&](const std::string& body) {
        std::ofstream(path, std::ios::trunc) << body;
        try {
            read_snapshot(path);
            FAIL("expected CorruptSnapshot");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::CorruptSnapshot);
        }
    };
    expect_corrupt(header + "\n" + first + "\n");  // truncated
    std::string tampered = second;
    tampered[tampered.find("\"content\":\"") + 11] = 'X';
    expect_corrupt(header + "\n" + first + "\n" + tampered + "\n");
    expect_corrupt("{\"format\":\"other\"}\n");
    expect_corrupt("");
    fs::remove(path);
}

TEST_CASE("concurrent readers and writers") {
    MemoryStore store(small_config(10'000));
    std::atomic<bool> failed{false};
    std::atomic<int> queries{0};
    std::vector<std::thread> threads;
    for (int w = 0; w < 2; ++w) {
        threads.emplace_back([&, w] {
            for (int b = 0; b < 10; ++b) {
                std::vector<RecordDraft> batch;
                for (int i = 0; i < 20; ++i) batch.push_back(rich(w * 10'000 + b * 100 + i));
                try {
                    store.ingest_batch(batch, kNow);
                } catch (...) {
                    failed = true;
                }
            }
        });
    }
    for (int r = 0; r < 3; ++r) {
        threads.emplace_back([&] {
            for (int i = 0; i < 50; ++i) {
                const auto hits = store.query("20GB data plan", 5).hits;
                for (std::size_t j = 1; j < hits.size(); ++j) {
                    if (hits[j].similarity > hits[j - 1].similarity) failed = true;
                }
                ++queries;
            }
        });
    }
    for (auto& t : threads) t.join();
    CHECK_FALSE(failed.load());
    CHECK(queries.load() == 150);
    CHECK(store.size() == 400);
    CHECK(store.usage_stats().longterm == 400);
}

TEST_CASE("property: ingestion is deterministic") {
    CorpusSpec spec;
    spec.total = 600;
    const auto corpus = generate_corpus(spec);
    auto run = [&] {
        MemoryStore store(small_config(300));
        for (std::size_t i = 0; i < corpus.size(); i += 100) {
            store.ingest_batch(std::span<const RecordDraft>(corpus.data() + i, 100),
                               Timestamp{spec.base_time.ms + static_cast<std::int64_t>(i)});
        }
        return store.records();
    };
    CHECK(run() == run());
}

}  // TEST_SUITE
