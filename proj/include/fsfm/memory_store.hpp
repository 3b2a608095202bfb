#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsfm/audit_log.hpp"
#include "fsfm/config.hpp"
#include "fsfm/fair_shared_mutex.hpp"
#include "fsfm/flat_index.hpp"
#include "fsfm/forgetting.hpp"
#include "fsfm/scoring.hpp"
#include "fsfm/types.hpp"

namespace fsfm {

enum class IngestMode {
    Forgetting,  // safety purge, consolidation threshold, working overflow, capacity prune
    Retain,      // every valid draft is consolidated; nothing is forgotten
};

struct MalformedDraft {
    std::string id;
    std::string message;
};

struct IngestReport {
    std::int64_t accepted = 0;  // drafts admitted into the sensory layer
    std::int64_t purged = 0;    // safety-triggered removals
    std::int64_t pruned = 0;    // capacity-prune and retention-expiry removals
    std::int64_t dropped = 0;   // sensory/working removals (not consolidated)
    std::vector<MalformedDraft> malformed;
    std::vector<ForgetDecision> decisions;
};

struct PromoteResult {
    std::optional<MemoryRecord> record;       // set when the record moved
    std::vector<ForgetDecision> decisions;    // the record itself if dropped, plus any evictions
};

struct QueryResult {
    std::vector<Hit> hits;
    std::int64_t latency_ns = 0;
};

struct UsageStats {
    std::int64_t sensory = 0;
    std::int64_t working = 0;
    std::int64_t longterm = 0;
    std::int64_t total = 0;
    double capacity_fraction = 0.0;  // longterm / capacity
    std::int64_t bytes_estimate = 0;
};

/// Serialized store state. On disk: one JSON header line followed by one record per line.
struct StoreSnapshot {
    PolicyConfig config;
    std::string config_digest;
    Timestamp created_at;
    std::uint64_t sequence = 0;
    std::vector<MemoryRecord> records;  // sorted by id
};

/// Writes `snapshot` to a temporary file and renames it over `path`.
void write_snapshot(const StoreSnapshot& snapshot, const std::filesystem::path& path);
/// Throws Error{CorruptSnapshot} on any header, count, or digest mismatch.
StoreSnapshot read_snapshot(const std::filesystem::path& path);

/// Three-layer record store with exact vector retrieval over the long-term layer.
///
/// Ingested drafts enter the sensory layer, pass through working memory in chunks of
/// at most working_capacity, and are consolidated into long-term storage when their
/// importance clears the consolidation threshold. In Forgetting mode every batch ends
/// with a safety purge and, when the long-term layer exceeds its cap, a prune cycle.
///
/// Thread safety: any number of concurrent readers or one writer; writers are admitted
/// in arrival order.
class MemoryStore {
public:
    explicit MemoryStore(PolicyConfig config, std::shared_ptr<const Scorer> scorer = nullptr);

    MemoryStore(MemoryStore&&) noexcept = default;
    MemoryStore& operator=(MemoryStore&&) noexcept = default;

    /// Throws Error{BatchTooLarge} and Error{Backpressure}; bad drafts are reported, not thrown.
    IngestReport ingest_batch(std::span<const RecordDraft> drafts, Timestamp now,
                              IngestMode mode = IngestMode::Forgetting);

    /// Places one draft in the sensory layer. Throws Error{MalformedRecord}.
    MemoryRecord observe(const RecordDraft& draft, Timestamp now);

    /// Sensory->Working or Working->LongTerm. Throws Error{IllegalTransition}.
    PromoteResult promote(std::string_view id, Layer from, Layer to, Timestamp now);

    /// Drops sensory records untouched for longer than sensory_ttl_seconds.
    std::vector<ForgetDecision> expire_sensory(Timestamp now);

    QueryResult query(std::string_view text, std::int64_t k) const;
    QueryResult query(std::span<const double> embedding, std::int64_t k) const;

    /// Reinforces a stored record on access.
    std::optional<MemoryRecord> access(std::string_view id, const ReinforcementSignal& signal, Timestamp now);

    /// Retention expiry plus capacity prune over the long-term layer.
    PruneOutcome prune(Timestamp now);
    std::vector<ForgetDecision> purge_dangerous(Timestamp now);
    UserDeleteResult forget_user(std::string_view user_id, Timestamp now);

    UsageStats usage_stats() const;
    std::optional<MemoryRecord> get(std::string_view id) const;
    /// All records sorted by id.
    std::vector<MemoryRecord> records() const;
    std::vector<MemoryRecord> records(Layer layer) const;
    std::size_t size() const;

    StoreSnapshot snapshot(Timestamp now) const;
    static MemoryStore from_snapshot(StoreSnapshot snapshot, std::shared_ptr<const Scorer> scorer = nullptr);

    /// Bumps the sequence number and writes a snapshot atomically. Returns the new sequence.
    std::uint64_t checkpoint(const std::filesystem::path& path, Timestamp now);
    static MemoryStore restore(const std::filesystem::path& path, std::shared_ptr<const Scorer> scorer = nullptr);

    std::uint64_t sequence() const;
    const PolicyConfig& config() const { return config_; }
    AuditLog& audit() { return audit_; }
    const AuditLog& audit() const { return audit_; }

    /// Same config, sequence number, and records.
    bool state_equals(const MemoryStore& other) const;

private:
    MemoryRecord materialize(const RecordDraft& draft, Timestamp now) const;
    void insert_locked(MemoryRecord record);
    void set_layer_locked(MemoryRecord& record, Layer layer);
    void remove_locked(std::string_view id);
    void apply_locked(std::span<const ForgetDecision> decisions);
    std::vector<MemoryRecord> layer_view_locked(Layer layer) const;
    std::vector<ForgetDecision> evict_working_overflow_locked(Timestamp now);
    PruneOutcome prune_locked(Timestamp now);
    std::int64_t bytes_estimate_locked() const;

    PolicyConfig config_;
    std::shared_ptr<const Scorer> scorer_;
    std::map<std::string, MemoryRecord, std::less<>> records_;
    FlatIndex index_;
    std::int64_t layer_counts_[3] = {0, 0, 0};
    std::uint64_t sequence_ = 0;
    AuditLog audit_;
    std::unique_ptr<FairSharedMutex> lock_;
};

}  // namespace fsfm
