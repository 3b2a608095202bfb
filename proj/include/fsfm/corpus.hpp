#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsfm/types.hpp"

namespace fsfm {

enum class AgeProfile {
    Uniform,          // every category aged uniformly over [0, max_age_days]
    ImportantOldest,  // every Important record is older than every other record
};

/// Category mix, indexed in kAllCategories order.
using CategoryMix = std::array<double, 5>;

/// Default blend: Important 12%, Medium 50%, General 15%, Sensitive 22%, Dangerous 1%.
inline constexpr CategoryMix kDefaultMix = {0.12, 0.50, 0.15, 0.22, 0.01};

struct CorpusSpec {
    std::int64_t total = 100'000;
    CategoryMix mix = kDefaultMix;
    std::uint64_t seed = 7;
    AgeProfile age_profile = AgeProfile::Uniform;
    double max_age_days = 60.0;
    Timestamp base_time = Timestamp::from_seconds(1'700'000'000);
    std::int64_t users = 50;
};

nlohmann::json to_json(const CorpusSpec& spec);
/// Missing keys keep their defaults. Throws Error{InvalidMix} / Error{InvalidConfig}.
CorpusSpec corpus_spec_from_json(const nlohmann::json& j);

/// Per-category record counts: floor of each share, with the remainder handed out by
/// largest fractional part (ties to the earlier category). Throws Error{InvalidMix}.
std::array<std::int64_t, 5> allocate_counts(const CorpusSpec& spec);

/// Deterministic synthetic drafts. Each draft's category is its ground-truth label;
/// content is shaped so the default lexicons classify Dangerous and Sensitive drafts
/// as such and leave the rest clean. Ids are "r000000", "r000001", ...
std::vector<RecordDraft> generate_corpus(const CorpusSpec& spec);

/// Information-seeking query texts in the corpus vocabulary.
std::vector<std::string> generate_queries(std::int64_t count, std::uint64_t seed);

}  // namespace fsfm
