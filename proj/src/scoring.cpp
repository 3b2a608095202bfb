#include "fsfm/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>
#include <string>
#include <unordered_map>

#include "fsfm/error.hpp"

namespace fsfm {

namespace {

constexpr std::string_view kCurrencyMarks[] = {"%", "$", "\xC2\xA5" /* ¥ */, "\xE2\x82\xAC" /* € */,
                                               "\xC2\xA3" /* £ */, "\xEF\xBF\xA5" /* ￥ */};

std::size_t code_points(std::string_view s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

}  // namespace

bool is_data_token(std::string_view token) {
    if (std::any_of(token.begin(), token.end(),
                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; })) {
        return true;
    }
    return std::any_of(std::begin(kCurrencyMarks), std::end(kCurrencyMarks),
                       [&](std::string_view mark) { return token.find(mark) != std::string_view::npos; });
}

std::size_t count_data_tokens(std::string_view content) {
    std::size_t count = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
        while (pos < content.size() && std::isspace(static_cast<unsigned char>(content[pos]))) ++pos;
        std::size_t end = pos;
        while (end < content.size() && !std::isspace(static_cast<unsigned char>(content[end]))) ++end;
        if (end > pos && is_data_token(content.substr(pos, end - pos))) ++count;
        pos = end;
    }
    return count;
}

double score_cqa(std::string_view content, const RuleSet& refusal) {
    if (refusal.matches(content)) return 0.0;
    const std::size_t data_tokens = count_data_tokens(content);
    if (data_tokens >= 2 && code_points(content) >= kDetailedLength) return 3.0;
    if (data_tokens >= 1) return 2.0;
    return 1.0;
}

double score_bve(ToolTag tool) {
    switch (tool) {
        case ToolTag::KnowledgeBaseQA:
        case ToolTag::CustomerProfiling:
        case ToolTag::CommunityQuery:
            return 3.0;
        case ToolTag::StandardQuery:
            return 2.0;
        case ToolTag::PageNavigation:
        case ToolTag::SimpleLookup:
        case ToolTag::Unknown:
            return 1.0;
    }
    return 1.0;
}

double score_trs(Timestamp last_accessed_at, Timestamp now, std::int64_t usage_frequency, double lambda) {
    if (now < last_accessed_at) {
        throw Error(ErrorCode::NegativeElapsedTime, "now precedes last_accessed_at");
    }
    const double days = days_between(last_accessed_at, now);
    const double raw = std::exp(-lambda * days) * static_cast<double>(std::max<std::int64_t>(usage_frequency, 0));
    return std::clamp(raw, 0.0, 2.0);
}

SecurityVerdict classify_security(std::string_view content, const RuleSet& dangerous, const RuleSet& sensitive) {
    if (dangerous.matches(content)) return {Category::Dangerous, kDangerousPenalty};
    if (sensitive.matches(content)) return {Category::Sensitive, kSensitivePenalty};
    return {};
}

double aggregate_importance(const ScoreBreakdown& b, const Weights& w) {
    if (b.src <= kDangerousPenalty) return kDangerousPenalty;
    return w.alpha * b.cqa + w.beta * b.bve + w.gamma * b.trs + w.delta * b.src;
}

double decay_rate_for(Category category, const PolicyConfig& config) {
    switch (category) {
        case Category::Important:
        case Category::Medium:
            return config.lambda_longterm;
        default:
            return config.lambda_transient;
    }
}

ScoreBreakdown refresh_temporal(const MemoryRecord& record, const PolicyConfig& config, Timestamp now) {
    ScoreBreakdown b = record.score;
    b.trs = score_trs(record.last_accessed_at, now, record.usage_frequency, decay_rate_for(record.category, config));
    b.importance = aggregate_importance(b, config.weights);
    return b;
}

double category_penalty(Category category) {
    switch (category) {
        case Category::Dangerous: return kDangerousPenalty;
        case Category::Sensitive: return kSensitivePenalty;
        default: return 0.0;
    }
}

Category escalate(Category declared, const SecurityVerdict& verdict) {
    if (declared == Category::Dangerous || verdict.hint == Category::Dangerous) return Category::Dangerous;
    if (declared == Category::Sensitive || verdict.hint == Category::Sensitive) return Category::Sensitive;
    return declared;
}

Scorer::Scorer()
    : Scorer(RuleSet::default_dangerous(), RuleSet::default_sensitive(), RuleSet::default_refusal()) {}

struct Scorer::Memo {
    // Bounds memory on unbounded streams of distinct content.
    static constexpr std::size_t kMaxEntries = 1 << 20;

    std::mutex mu;
    std::unordered_map<std::string, ContentScores> entries;
};

Scorer::Scorer(RuleSet dangerous, RuleSet sensitive, RuleSet refusal)
    : dangerous_(std::move(dangerous)),
      sensitive_(std::move(sensitive)),
      refusal_(std::move(refusal)),
      memo_(std::make_unique<Memo>()) {}

Scorer::~Scorer() = default;
Scorer::Scorer(Scorer&&) noexcept = default;
Scorer& Scorer::operator=(Scorer&&) noexcept = default;

Scorer::ContentScores Scorer::content_scores(std::string_view content) const {
    const std::string key(content);
    {
        std::lock_guard lock(memo_->mu);
        if (auto it = memo_->entries.find(key); it != memo_->entries.end()) return it->second;
    }
    const ContentScores fresh{classify_security(content, dangerous_, sensitive_), score_cqa(content, refusal_)};
    std::lock_guard lock(memo_->mu);
    if (memo_->entries.size() >= Memo::kMaxEntries) memo_->entries.clear();
    memo_->entries.emplace(key, fresh);
    return fresh;
}

SecurityVerdict Scorer::classify(std::string_view content) const { return content_scores(content).verdict; }

double Scorer::cqa(std::string_view content) const { return content_scores(content).cqa; }

ScoreBreakdown Scorer::score(const MemoryRecord& record, const PolicyConfig& config, Timestamp now) const {
    return score(record, config, now, classify(record.content));
}

ScoreBreakdown Scorer::score(const MemoryRecord& record, const PolicyConfig& config, Timestamp now,
                             const SecurityVerdict& verdict) const {
    ScoreBreakdown b;
    b.cqa = cqa(record.content);
    b.bve = score_bve(record.tool_tag);
    b.trs = score_trs(record.last_accessed_at, now, record.usage_frequency,
                      decay_rate_for(record.category, config));
    b.src = std::min(verdict.src, category_penalty(record.category));
    b.importance = aggregate_importance(b, config.weights);
    return b;
}

const Scorer& default_scorer() {
    static const Scorer scorer;
    return scorer;
}

}  // namespace fsfm
