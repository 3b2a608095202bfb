#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fsfm {

/// Five-way classification of stored interactions.
enum class Category { Important, Medium, General, Sensitive, Dangerous };

enum class Layer { Sensory, Working, LongTerm };

/// Business tool that produced a record. Drives the business-value score.
enum class ToolTag {
    KnowledgeBaseQA,
    CustomerProfiling,
    CommunityQuery,
    StandardQuery,
    PageNavigation,
    SimpleLookup,
    Unknown,
};

inline constexpr Category kAllCategories[] = {Category::Important, Category::Medium,
                                              Category::General, Category::Sensitive,
                                              Category::Dangerous};

std::string_view to_string(Category c);
std::string_view to_string(Layer l);
std::string_view to_string(ToolTag t);

// Parsers throw Error{MalformedRecord} on unknown names.
Category parse_category(std::string_view s);
Layer parse_layer(std::string_view s);
ToolTag parse_tool_tag(std::string_view s);

/// Milliseconds since the Unix epoch. Formats expose seconds; decay math uses days.
struct Timestamp {
    std::int64_t ms = 0;

    static constexpr Timestamp from_seconds(std::int64_t s) { return {s * 1000}; }
    static Timestamp from_fractional_seconds(double s);
    double seconds() const { return static_cast<double>(ms) / 1000.0; }

    friend constexpr auto operator<=>(Timestamp, Timestamp) = default;
};

constexpr double kMsPerDay = 86'400'000.0;

/// Elapsed days from `from` to `to` (negative if `to` precedes `from`).
inline double days_between(Timestamp from, Timestamp to) {
    return static_cast<double>(to.ms - from.ms) / kMsPerDay;
}

struct ScoreBreakdown {
    double cqa = 0.0;         // [0, 3]
    double bve = 0.0;         // [1, 3]
    double trs = 0.0;         // [0, 2]
    double src = 0.0;         // {0, -2, -10}
    double importance = 0.0;

    friend bool operator==(const ScoreBreakdown&, const ScoreBreakdown&) = default;
};

struct MemoryRecord {
    std::string id;
    std::string content;
    std::vector<double> embedding;
    Category category = Category::General;
    ToolTag tool_tag = ToolTag::Unknown;
    Timestamp created_at;
    Timestamp last_accessed_at;
    std::int64_t usage_frequency = 1;
    Layer layer = Layer::Sensory;
    ScoreBreakdown score;
    std::optional<std::string> user_id;

    friend bool operator==(const MemoryRecord&, const MemoryRecord&) = default;
};

/// Caller-supplied feedback applied on access.
struct ReinforcementSignal {
    double user_feedback = 0.0;         // [-1, 1]
    double contextual_relevance = 0.0;  // [0, 1]
    double emotional_valence = 0.0;     // [0, 1]
    double social_consensus = 0.0;      // [0, 1]
    bool security_compliance = true;

    bool in_range() const;
};

}  // namespace fsfm

namespace fsfm {

/// Ingestion input. Unset fields are filled in by the store.
struct RecordDraft {
    std::string id;
    std::string content;
    std::vector<double> embedding;  // empty: embed from content
    std::optional<Category> category;
    ToolTag tool_tag = ToolTag::Unknown;
    std::optional<Timestamp> created_at;
    std::optional<Timestamp> last_accessed_at;
    std::int64_t usage_frequency = 1;
    std::optional<std::string> user_id;

    friend bool operator==(const RecordDraft&, const RecordDraft&) = default;
};

}  // namespace fsfm
