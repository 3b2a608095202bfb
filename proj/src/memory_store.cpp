#include "fsfm/memory_store.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <shared_mutex>
#include <sstream>

#include "fsfm/embedding.hpp"
#include "fsfm/error.hpp"
#include "fsfm/digest.hpp"
#include "fsfm/record_io.hpp"

namespace fsfm {

using nlohmann::json;

namespace {

constexpr std::string_view kSnapshotFormat = "fsfm-snapshot";
constexpr int kSnapshotVersion = 1;

std::size_t layer_slot(Layer l) { return static_cast<std::size_t>(l); }

bool legal_transition(Layer from, Layer to) {
    return (from == Layer::Sensory && to == Layer::Working) || (from == Layer::Working && to == Layer::LongTerm);
}

}  // namespace

MemoryStore::MemoryStore(PolicyConfig config, std::shared_ptr<const Scorer> scorer)
    : config_(validated(std::move(config))),
      scorer_(scorer ? std::move(scorer) : std::shared_ptr<const Scorer>(&default_scorer(), [](const Scorer*) {})),
      index_(static_cast<std::size_t>(config_.embedding_dim)),
      lock_(std::make_unique<FairSharedMutex>()) {}

MemoryRecord MemoryStore::materialize(const RecordDraft& draft, Timestamp now) const {
    if (draft.id.empty()) throw Error(ErrorCode::MalformedRecord, "empty id");
    if (records_.contains(draft.id)) throw Error(ErrorCode::MalformedRecord, "duplicate id '" + draft.id + "'");

    MemoryRecord r;
    r.id = draft.id;
    r.content = draft.content;
    if (draft.embedding.empty()) {
        r.embedding = embed(draft.content, config_.embedding_dim, config_.rng_seed);
    } else {
        if (static_cast<std::int64_t>(draft.embedding.size()) != config_.embedding_dim) {
            throw Error(ErrorCode::MalformedRecord, "embedding has dimension " + std::to_string(draft.embedding.size()));
        }
        const double norm = l2_norm(draft.embedding);
        if (!(norm > 0.0) || !std::isfinite(norm)) throw Error(ErrorCode::MalformedRecord, "zero or non-finite embedding");
        r.embedding = draft.embedding;
        if (std::fabs(norm - 1.0) > 1e-9) {
            for (double& x : r.embedding) x /= norm;
        }
    }
    if (draft.content.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error(ErrorCode::EmptyContent, "content is blank");
    }
    r.created_at = draft.created_at.value_or(now);
    r.last_accessed_at = draft.last_accessed_at.value_or(r.created_at);
    if (r.last_accessed_at < r.created_at) throw Error(ErrorCode::MalformedRecord, "last_accessed_at precedes created_at");
    if (now < r.last_accessed_at) throw Error(ErrorCode::NegativeElapsedTime, "last_accessed_at is in the future");
    r.usage_frequency = std::max<std::int64_t>(1, draft.usage_frequency);
    r.tool_tag = draft.tool_tag;
    r.user_id = draft.user_id;

    const SecurityVerdict verdict = scorer_->classify(r.content);
    r.category = escalate(draft.category.value_or(verdict.hint.value_or(Category::General)), verdict);
    r.layer = Layer::Sensory;
    r.score = scorer_->score(r, config_, now, verdict);
    return r;
}

void MemoryStore::insert_locked(MemoryRecord record) {
    ++layer_counts_[layer_slot(record.layer)];
    if (record.layer == Layer::LongTerm) index_.upsert(record.id, record.embedding);
    std::string id = record.id;
    records_.emplace(std::move(id), std::move(record));
}

void MemoryStore::set_layer_locked(MemoryRecord& record, Layer layer) {
    if (record.layer == layer) return;
    --layer_counts_[layer_slot(record.layer)];
    if (record.layer == Layer::LongTerm) index_.erase(record.id);
    record.layer = layer;
    ++layer_counts_[layer_slot(layer)];
    if (layer == Layer::LongTerm) index_.upsert(record.id, record.embedding);
}

void MemoryStore::remove_locked(std::string_view id) {
    auto it = records_.find(id);
    if (it == records_.end()) return;
    --layer_counts_[layer_slot(it->second.layer)];
    if (it->second.layer == Layer::LongTerm) index_.erase(id);
    records_.erase(it);
}

void MemoryStore::apply_locked(std::span<const ForgetDecision> decisions) {
    for (const auto& d : decisions) remove_locked(d.record_id);
    audit_.append(decisions);
}

std::vector<MemoryRecord> MemoryStore::layer_view_locked(Layer layer) const {
    std::vector<MemoryRecord> out;
    out.reserve(static_cast<std::size_t>(layer_counts_[layer_slot(layer)]));
    for (const auto& [id, r] : records_) {
        if (r.layer == layer) out.push_back(r);
    }
    return out;
}

std::vector<ForgetDecision> MemoryStore::evict_working_overflow_locked(Timestamp now) {
    std::vector<ForgetDecision> out;
    const std::int64_t over = layer_counts_[layer_slot(Layer::Working)] - config_.working_capacity;
    if (over <= 0) return out;
    std::vector<ScoredId> working;
    for (const auto& [id, r] : records_) {
        if (r.layer == Layer::Working) working.push_back({id, r.score.importance, r.created_at});
    }
    const auto evict = select_forget_set(working, config_.working_capacity);
    for (const auto& id : evict) {
        const auto& r = records_.find(id)->second;
        out.push_back({id, ForgetPolicy::PassiveDecay, r.score.importance, now, "working_overflow"});
    }
    apply_locked(out);
    return out;
}

PruneOutcome MemoryStore::prune_locked(Timestamp now) {
    const std::int64_t count = layer_counts_[layer_slot(Layer::LongTerm)];
    if (config_.sensitive_retention_days <= 0.0 && prune_budget(count, config_) == 0) {
        PruneOutcome idle;
        idle.retained_count = count;
        idle.capacity_after = static_cast<double>(count) / static_cast<double>(config_.capacity);
        return idle;
    }
    auto longterm = layer_view_locked(Layer::LongTerm);
    auto expired = expire_sensitive(longterm, config_, now);
    if (!expired.empty()) {
        apply_locked(expired);
        longterm = layer_view_locked(Layer::LongTerm);
    }

    PruneOutcome outcome = capacity_prune_cached(longterm, config_, now);
    for (std::size_t i = 0; i < longterm.size(); ++i) {
        records_.find(longterm[i].id)->second.score = outcome.rescored[i];
    }
    apply_locked(outcome.forgotten);
    outcome.forgotten.insert(outcome.forgotten.begin(), expired.begin(), expired.end());
    audit_.flush();
    return outcome;
}

IngestReport MemoryStore::ingest_batch(std::span<const RecordDraft> drafts, Timestamp now, IngestMode mode) {
    std::unique_lock lock(*lock_);
    if (static_cast<std::int64_t>(drafts.size()) > config_.batch_size) {
        throw Error(ErrorCode::BatchTooLarge, std::to_string(drafts.size()) + " drafts exceed batch size " +
                                                  std::to_string(config_.batch_size));
    }
    if (config_.memory_watermark_bytes > 0 && bytes_estimate_locked() > config_.memory_watermark_bytes) {
        throw Error(ErrorCode::Backpressure, "memory estimate above watermark; prune before ingesting");
    }

    const bool forgetting = mode == IngestMode::Forgetting;
    IngestReport report;
    auto record_decisions = [&](const std::vector<ForgetDecision>& ds, std::int64_t& counter) {
        counter += static_cast<std::int64_t>(ds.size());
        report.decisions.insert(report.decisions.end(), ds.begin(), ds.end());
    };

    // Sensory intake.
    std::vector<std::string> admitted;
    for (const auto& draft : drafts) {
        try {
            MemoryRecord r = materialize(draft, now);
            admitted.push_back(r.id);
            insert_locked(std::move(r));
        } catch (const Error& e) {
            report.malformed.push_back({draft.id, e.what()});
        }
    }
    report.accepted = static_cast<std::int64_t>(admitted.size());

    // Working memory processes the batch in chunks it can hold.
    const auto chunk = static_cast<std::size_t>(config_.working_capacity);
    for (std::size_t begin = 0; begin < admitted.size(); begin += chunk) {
        const std::size_t end = std::min(admitted.size(), begin + chunk);
        for (std::size_t i = begin; i < end; ++i) set_layer_locked(records_.find(admitted[i])->second, Layer::Working);
        if (!forgetting) {
            for (std::size_t i = begin; i < end; ++i) {
                set_layer_locked(records_.find(admitted[i])->second, Layer::LongTerm);
            }
            continue;
        }
        record_decisions(evict_working_overflow_locked(now), report.dropped);

        std::vector<ForgetDecision> unsafe;
        std::vector<ForgetDecision> weak;
        for (std::size_t i = begin; i < end; ++i) {
            auto it = records_.find(admitted[i]);
            if (it == records_.end() || it->second.layer != Layer::Working) continue;
            const auto& r = it->second;
            if (r.score.src <= kDangerousPenalty) {
                unsafe.push_back({r.id, ForgetPolicy::SafetyTriggered, r.score.importance, now, "dangerous_content"});
            } else if (r.score.importance < config_.consolidation_threshold) {
                weak.push_back({r.id, ForgetPolicy::PassiveDecay, r.score.importance, now, "below_consolidation_threshold"});
            }
        }
        apply_locked(unsafe);
        apply_locked(weak);
        record_decisions(unsafe, report.purged);
        record_decisions(weak, report.dropped);
        for (std::size_t i = begin; i < end; ++i) {
            auto it = records_.find(admitted[i]);
            if (it != records_.end() && it->second.layer == Layer::Working) set_layer_locked(it->second, Layer::LongTerm);
        }
    }

    if (forgetting) {
        std::vector<MemoryRecord> all;
        all.reserve(records_.size());
        for (const auto& [id, r] : records_) {
            if (r.score.src <= kDangerousPenalty) all.push_back(r);
        }
        auto purge = safety_purge(all, now);
        apply_locked(purge);
        record_decisions(purge, report.purged);

        auto outcome = prune_locked(now);
        record_decisions(outcome.forgotten, report.pruned);
    }
    audit_.flush();
    return report;
}

MemoryRecord MemoryStore::observe(const RecordDraft& draft, Timestamp now) {
    std::unique_lock lock(*lock_);
    RecordDraft touched = draft;
    touched.last_accessed_at = now;
    if (!touched.created_at || *touched.created_at > now) touched.created_at = now;
    MemoryRecord r = materialize(touched, now);
    insert_locked(r);
    return r;
}

PromoteResult MemoryStore::promote(std::string_view id, Layer from, Layer to, Timestamp now) {
    std::unique_lock lock(*lock_);
    if (!legal_transition(from, to)) {
        throw Error(ErrorCode::IllegalTransition,
                    std::string(to_string(from)) + " -> " + std::string(to_string(to)) + " is not allowed");
    }
    auto it = records_.find(id);
    if (it == records_.end()) throw Error(ErrorCode::InvalidArgument, "no record '" + std::string(id) + "'");
    MemoryRecord& r = it->second;
    if (r.layer != from) {
        throw Error(ErrorCode::IllegalTransition, "record '" + r.id + "' is in " + std::string(to_string(r.layer)));
    }

    PromoteResult result;
    if (from == Layer::Sensory) {
        if (now < r.last_accessed_at) throw Error(ErrorCode::NegativeElapsedTime, "now precedes last access");
        if (now.ms - r.last_accessed_at.ms > config_.sensory_ttl_seconds * 1000) {
            result.decisions.push_back({r.id, ForgetPolicy::PassiveDecay, r.score.importance, now, "sensory_ttl_expired"});
            apply_locked(result.decisions);
            audit_.flush();
            return result;
        }
        const std::string kept = r.id;
        set_layer_locked(r, Layer::Working);
        result.decisions = evict_working_overflow_locked(now);
        if (auto again = records_.find(kept); again != records_.end()) result.record = again->second;
        audit_.flush();
        return result;
    }

    r.score = refresh_temporal(r, config_, now);
    if (r.score.src <= kDangerousPenalty || r.score.importance < config_.consolidation_threshold) {
        result.decisions.push_back({r.id, r.score.src <= kDangerousPenalty ? ForgetPolicy::SafetyTriggered
                                                                           : ForgetPolicy::PassiveDecay,
                                    r.score.importance, now,
                                    r.score.src <= kDangerousPenalty ? "dangerous_content"
                                                                     : "below_consolidation_threshold"});
        apply_locked(result.decisions);
        audit_.flush();
        return result;
    }
    const std::string kept = r.id;
    set_layer_locked(r, Layer::LongTerm);
    auto outcome = prune_locked(now);
    result.decisions.insert(result.decisions.end(), outcome.forgotten.begin(), outcome.forgotten.end());
    if (auto again = records_.find(kept); again != records_.end()) result.record = again->second;
    return result;
}

std::vector<ForgetDecision> MemoryStore::expire_sensory(Timestamp now) {
    std::unique_lock lock(*lock_);
    std::vector<ForgetDecision> out;
    for (const auto& [id, r] : records_) {
        if (r.layer == Layer::Sensory && now.ms - r.last_accessed_at.ms > config_.sensory_ttl_seconds * 1000) {
            out.push_back({id, ForgetPolicy::PassiveDecay, r.score.importance, now, "sensory_ttl_expired"});
        }
    }
    apply_locked(out);
    audit_.flush();
    return out;
}

QueryResult MemoryStore::query(std::string_view text, std::int64_t k) const {
    const auto embedding = embed(text, config_.embedding_dim, config_.rng_seed);
    return query(embedding, k);
}

QueryResult MemoryStore::query(std::span<const double> embedding, std::int64_t k) const {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    std::shared_lock lock(*lock_);
    const auto start = std::chrono::steady_clock::now();
    QueryResult result;
    result.hits = index_.search(embedding, static_cast<std::size_t>(k));
    result.latency_ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::optional<MemoryRecord> MemoryStore::access(std::string_view id, const ReinforcementSignal& signal, Timestamp now) {
    std::unique_lock lock(*lock_);
    auto it = records_.find(id);
    if (it == records_.end()) return std::nullopt;
    it->second = reinforce(it->second, signal, config_, now, *scorer_);
    return it->second;
}

PruneOutcome MemoryStore::prune(Timestamp now) {
    std::unique_lock lock(*lock_);
    return prune_locked(now);
}

std::vector<ForgetDecision> MemoryStore::purge_dangerous(Timestamp now) {
    std::unique_lock lock(*lock_);
    std::vector<MemoryRecord> all;
    for (const auto& [id, r] : records_) all.push_back(r);
    auto out = safety_purge(all, now);
    apply_locked(out);
    audit_.flush();
    return out;
}

UserDeleteResult MemoryStore::forget_user(std::string_view user_id, Timestamp now) {
    std::unique_lock lock(*lock_);
    std::vector<MemoryRecord> all;
    for (const auto& [id, r] : records_) all.push_back(r);
    auto out = user_requested_delete(all, user_id, now);
    apply_locked(out.decisions);
    audit_.flush();
    return out;
}

std::int64_t MemoryStore::bytes_estimate_locked() const {
    std::int64_t bytes = 0;
    for (const auto& [id, r] : records_) {
        bytes += static_cast<std::int64_t>(sizeof(MemoryRecord) + 2 * r.id.size() + r.content.size() +
                                           r.embedding.size() * sizeof(double) +
                                           (r.user_id ? r.user_id->size() : 0));
    }
    return bytes;
}

UsageStats MemoryStore::usage_stats() const {
    std::shared_lock lock(*lock_);
    UsageStats s;
    s.sensory = layer_counts_[layer_slot(Layer::Sensory)];
    s.working = layer_counts_[layer_slot(Layer::Working)];
    s.longterm = layer_counts_[layer_slot(Layer::LongTerm)];
    s.total = static_cast<std::int64_t>(records_.size());
    s.capacity_fraction = static_cast<double>(s.longterm) / static_cast<double>(config_.capacity);
    s.bytes_estimate = bytes_estimate_locked();
    return s;
}

std::optional<MemoryRecord> MemoryStore::get(std::string_view id) const {
    std::shared_lock lock(*lock_);
    auto it = records_.find(id);
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

std::vector<MemoryRecord> MemoryStore::records() const {
    std::shared_lock lock(*lock_);
    std::vector<MemoryRecord> out;
    out.reserve(records_.size());
    for (const auto& [id, r] : records_) out.push_back(r);
    return out;
}

std::vector<MemoryRecord> MemoryStore::records(Layer layer) const {
    std::shared_lock lock(*lock_);
    return layer_view_locked(layer);
}

std::size_t MemoryStore::size() const {
    std::shared_lock lock(*lock_);
    return records_.size();
}

std::uint64_t MemoryStore::sequence() const {
    std::shared_lock lock(*lock_);
    return sequence_;
}

StoreSnapshot MemoryStore::snapshot(Timestamp now) const {
    std::shared_lock lock(*lock_);
    StoreSnapshot s;
    s.config = config_;
    s.config_digest = config_digest(config_);
    s.created_at = now;
    s.sequence = sequence_;
    s.records.reserve(records_.size());
    for (const auto& [id, r] : records_) s.records.push_back(r);
    return s;
}

MemoryStore MemoryStore::from_snapshot(StoreSnapshot snapshot, std::shared_ptr<const Scorer> scorer) {
    MemoryStore store(snapshot.config, std::move(scorer));
    for (auto& r : snapshot.records) {
        if (store.records_.contains(r.id)) throw Error(ErrorCode::CorruptSnapshot, "duplicate id '" + r.id + "'");
        store.insert_locked(std::move(r));
    }
    store.sequence_ = snapshot.sequence;
    return store;
}

std::uint64_t MemoryStore::checkpoint(const std::filesystem::path& path, Timestamp now) {
    std::unique_lock lock(*lock_);
    StoreSnapshot s;
    s.config = config_;
    s.config_digest = config_digest(config_);
    s.created_at = now;
    s.sequence = sequence_ + 1;
    s.records.reserve(records_.size());
    for (const auto& [id, r] : records_) s.records.push_back(r);
    write_snapshot(s, path);
    sequence_ = s.sequence;
    return sequence_;
}

MemoryStore MemoryStore::restore(const std::filesystem::path& path, std::shared_ptr<const Scorer> scorer) {
    return from_snapshot(read_snapshot(path), std::move(scorer));
}

bool MemoryStore::state_equals(const MemoryStore& other) const {
    std::shared_lock a(*lock_);
    std::shared_lock b(*other.lock_);
    return config_ == other.config_ && sequence_ == other.sequence_ && records_ == other.records_;
}

void write_snapshot(const StoreSnapshot& snapshot, const std::filesystem::path& path) {
    std::string body;
    Sha256 digest;
    for (const auto& r : snapshot.records) {
        std::string line = to_jsonl_line(r);
        line.push_back('\n');
        digest.update(line);
        body += line;
    }
    json header{{"format", kSnapshotFormat},
                {"version", kSnapshotVersion},
                {"sequence", snapshot.sequence},
                {"created_at", snapshot.created_at.ms % 1000 == 0 ? json(snapshot.created_at.ms / 1000)
                                                                  : json(snapshot.created_at.seconds())},
                {"config", to_json(snapshot.config)},
                {"config_digest", config_digest(snapshot.config)},
                {"record_count", snapshot.records.size()},
                {"content_digest", digest.hex_digest()}};

    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + tmp.string());
        out << header.dump() << '\n' << body;
        out.flush();
        if (!out) throw Error(ErrorCode::IoFailure, "write failed on " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "rename to " + path.string() + ": " + ec.message());
}

StoreSnapshot read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open snapshot " + path.string());

    auto corrupt = [&](const std::string& why) { return Error(ErrorCode::CorruptSnapshot, path.string() + ": " + why); };

    std::string line;
    if (!std::getline(in, line)) throw corrupt("missing header");
    StoreSnapshot s;
    std::size_t expected = 0;
    std::string expected_digest;
    try {
        const json header = json::parse(line);
        if (header.at("format").get<std::string>() != kSnapshotFormat) throw corrupt("not a snapshot");
        if (header.at("version").get<int>() != kSnapshotVersion) throw corrupt("unsupported version");
        s.sequence = header.at("sequence").get<std::uint64_t>();
        s.created_at = Timestamp::from_fractional_seconds(header.at("created_at").get<double>());
        s.config = config_from_json(header.at("config"));
        s.config_digest = header.at("config_digest").get<std::string>();
        expected = header.at("record_count").get<std::size_t>();
        expected_digest = header.at("content_digest").get<std::string>();
    } catch (const json::exception& e) {
        throw corrupt(std::string("bad header: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::CorruptSnapshot) throw;
        throw corrupt(e.what());
    }
    if (s.config_digest != config_digest(s.config)) throw corrupt("config digest mismatch");

    Sha256 digest;
    bool complete_line = true;
    while (std::getline(in, line)) {
        complete_line = !in.eof();
        std::string with_newline = line + (complete_line ? "\n" : "");
        digest.update(with_newline);
        if (line.empty()) continue;
        try {
            s.records.push_back(record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw corrupt("record " + std::to_string(s.records.size() + 1) + ": " + e.what());
        } catch (const Error& e) {
            throw corrupt("record " + std::to_string(s.records.size() + 1) + ": " + e.what());
        }
    }
    if (s.records.size() != expected) {
        throw corrupt("expected " + std::to_string(expected) + " records, found " + std::to_string(s.records.size()));
    }
    if (digest.hex_digest() != expected_digest) throw corrupt("content digest mismatch");
    return s;
}

}  // namespace fsfm
