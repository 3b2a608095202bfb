#include "fsfm/types.hpp"

#include <array>
#include <cmath>
#include <utility>

#include "fsfm/error.hpp"

namespace fsfm {

namespace {

constexpr std::array<std::pair<Category, std::string_view>, 5> kCategoryNames{{
    {Category::Important, "Important"},
    {Category::Medium, "Medium"},
    {Category::General, "General"},
    {Category::Sensitive, "Sensitive"},
    {Category::Dangerous, "Dangerous"},
}};

constexpr std::array<std::pair<Layer, std::string_view>, 3> kLayerNames{{
    {Layer::Sensory, "Sensory"},
    {Layer::Working, "Working"},
    {Layer::LongTerm, "LongTerm"},
}};

constexpr std::array<std::pair<ToolTag, std::string_view>, 7> kToolNames{{
    {ToolTag::KnowledgeBaseQA, "KnowledgeBaseQA"},
    {ToolTag::CustomerProfiling, "CustomerProfiling"},
    {ToolTag::CommunityQuery, "CommunityQuery"},
    {ToolTag::StandardQuery, "StandardQuery"},
    {ToolTag::PageNavigation, "PageNavigation"},
    {ToolTag::SimpleLookup, "SimpleLookup"},
    {ToolTag::Unknown, "Unknown"},
}};

template <typename Table, typename E>
std::string_view name_of(const Table& table, E value) {
    for (const auto& [v, name] : table) {
        if (v == value) return name;
    }
    return "?";
}

template <typename Table>
auto value_of(const Table& table, std::string_view name, const char* what) {
    for (const auto& [v, n] : table) {
        if (n == name) return v;
    }
    throw Error(ErrorCode::MalformedRecord, std::string("unknown ") + what + " '" + std::string(name) + "'");
}

}  // namespace

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::EmptyContent: return "EmptyContent";
        case ErrorCode::NegativeElapsedTime: return "NegativeElapsedTime";
        case ErrorCode::NegativeTime: return "NegativeTime";
        case ErrorCode::NonMonotonicEvents: return "NonMonotonicEvents";
        case ErrorCode::KTooLarge: return "KTooLarge";
        case ErrorCode::BatchTooLarge: return "BatchTooLarge";
        case ErrorCode::MalformedRecord: return "MalformedRecord";
        case ErrorCode::IllegalTransition: return "IllegalTransition";
        case ErrorCode::CorruptSnapshot: return "CorruptSnapshot";
        case ErrorCode::Backpressure: return "Backpressure";
        case ErrorCode::DegenerateSamples: return "DegenerateSamples";
        case ErrorCode::InvalidMix: return "InvalidMix";
        case ErrorCode::IncompleteReport: return "IncompleteReport";
        case ErrorCode::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

std::string_view to_string(Category c) { return name_of(kCategoryNames, c); }
std::string_view to_string(Layer l) { return name_of(kLayerNames, l); }
std::string_view to_string(ToolTag t) { return name_of(kToolNames, t); }

Category parse_category(std::string_view s) { return value_of(kCategoryNames, s, "category"); }
Layer parse_layer(std::string_view s) { return value_of(kLayerNames, s, "layer"); }
ToolTag parse_tool_tag(std::string_view s) { return value_of(kToolNames, s, "tool_tag"); }

Timestamp Timestamp::from_fractional_seconds(double s) {
    return {static_cast<std::int64_t>(std::llround(s * 1000.0))};
}

bool ReinforcementSignal::in_range() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    return user_feedback >= -1.0 && user_feedback <= 1.0 && unit(contextual_relevance) &&
           unit(emotional_valence) && unit(social_consensus);
}

}  // namespace fsfm
