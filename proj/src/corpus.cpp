#include "fsfm/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fsfm/error.hpp"

namespace fsfm {

using nlohmann::json;

namespace {

constexpr const char* kPlans[] = {"Gold", "Silver", "Family", "Student", "Business", "Unlimited", "Travel"};
constexpr const char* kServices[] = {"roaming", "broadband", "voicemail", "streaming", "cloud backup", "SMS bundle"};
constexpr const char* kStatuses[] = {"active", "suspended", "pending activation", "scheduled for renewal"};
constexpr const char* kPages[] = {"billing", "account settings", "help center", "store locator", "order history",
                                  "device support"};
constexpr const char* kActions[] = {"review your options", "change preferences", "find more details",
                                    "contact an agent", "check the latest notices"};
constexpr const char* kUnsafe[] = {"hate", "sexual", "violence", "suicide_self_harm", "threat", "sexual_minor",
                                   "guns_illegal_weapons", "controlled_substances", "criminal_planning",
                                   "pii_privacy", "harassment", "profanity", "other"};
constexpr const char* kStreets[] = {"Maple Street", "Harbor Road", "Lake Avenue", "Cedar Lane", "Sunset Boulevard"};
constexpr const char* kQueryTopics[] = {"data plan", "monthly fee", "roaming charges", "billing page",
                                        "service status", "renewal date", "account settings", "broadband speed"};

template <std::size_t N>
const char* pick(std::mt19937_64& rng, const char* const (&options)[N]) {
    return options[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
}

std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

std::string digits(std::mt19937_64& rng, int count) {
    std::string s;
    for (int i = 0; i < count; ++i) s.push_back(static_cast<char>('0' + uniform_int(rng, 0, 9)));
    return s;
}

std::string important_content(std::mt19937_64& rng) {
    return std::string("Your ") + pick(rng, kPlans) + " plan includes " + std::to_string(uniform_int(rng, 5, 200)) +
           "GB of data at \xC2\xA5" + std::to_string(uniform_int(rng, 19, 399)) + "/month and renews on day " +
           std::to_string(uniform_int(rng, 1, 28)) + " of each billing cycle.";
}

std::string medium_content(std::mt19937_64& rng) {
    return std::string("The ") + pick(rng, kServices) + " service on your line is " + pick(rng, kStatuses) +
           ", see ticket " + std::to_string(uniform_int(rng, 1000, 99999)) + " for follow-up.";
}

std::string general_content(std::mt19937_64& rng) {
    return std::string("Open the ") + pick(rng, kPages) + " page from the main menu to " + pick(rng, kActions) +
           " (step " + std::to_string(uniform_int(rng, 1, 9)) + ").";
}

std::string sensitive_content(std::mt19937_64& rng) {
    switch (uniform_int(rng, 0, 3)) {
        case 0:
            return "Please update my contact phone to 1" + std::to_string(uniform_int(rng, 3, 9)) + digits(rng, 9) +
                   " for service alerts.";
        case 1:
            return "My home address is " + std::to_string(uniform_int(rng, 1, 999)) + " " + pick(rng, kStreets) +
                   ", send the invoice there.";
        case 2:
            return "Charge the bill to my card number " + digits(rng, 4) + " " + digits(rng, 4) + " " +
                   digits(rng, 4) + " " + digits(rng, 4) + " this month.";
        default:
            return "You can reach me at customer" + std::to_string(uniform_int(rng, 1, 9999)) +
                   "@example.com about the refund.";
    }
}

std::string dangerous_content(std::mt19937_64& rng) {
    return std::string("[unsafe:") + pick(rng, kUnsafe) + "] flagged request retained for policy review, case " +
           std::to_string(uniform_int(rng, 100, 999)) + ".";
}

ToolTag tool_for(Category c, std::mt19937_64& rng) {
    switch (c) {
        case Category::Important: {
            constexpr ToolTag kHigh[] = {ToolTag::KnowledgeBaseQA, ToolTag::CustomerProfiling, ToolTag::CommunityQuery};
            return kHigh[uniform_int(rng, 0, 2)];
        }
        case Category::Medium: return ToolTag::StandardQuery;
        case Category::General: return uniform_int(rng, 0, 1) == 0 ? ToolTag::PageNavigation : ToolTag::SimpleLookup;
        case Category::Sensitive: return ToolTag::SimpleLookup;
        case Category::Dangerous: return ToolTag::Unknown;
    }
    return ToolTag::Unknown;
}

AgeProfile parse_age_profile(const std::string& s) {
    if (s == "uniform") return AgeProfile::Uniform;
    if (s == "important_oldest") return AgeProfile::ImportantOldest;
    throw Error(ErrorCode::InvalidConfig, "unknown age_profile '" + s + "'");
}

}  // namespace

json to_json(const CorpusSpec& spec) {
    json mix = json::object();
    for (std::size_t i = 0; i < 5; ++i) mix[std::string(to_string(kAllCategories[i]))] = spec.mix[i];
    return json{{"total", spec.total},
                {"mix", mix},
                {"seed", spec.seed},
                {"age_profile", spec.age_profile == AgeProfile::Uniform ? "uniform" : "important_oldest"},
                {"max_age_days", spec.max_age_days},
                {"base_time", spec.base_time.ms / 1000},
                {"users", spec.users}};
}

CorpusSpec corpus_spec_from_json(const json& j) {
    CorpusSpec spec;
    try {
        if (j.contains("total")) spec.total = j.at("total").get<std::int64_t>();
        if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("age_profile")) spec.age_profile = parse_age_profile(j.at("age_profile").get<std::string>());
        if (j.contains("max_age_days")) spec.max_age_days = j.at("max_age_days").get<double>();
        if (j.contains("base_time")) spec.base_time = Timestamp::from_seconds(j.at("base_time").get<std::int64_t>());
        if (j.contains("users")) spec.users = j.at("users").get<std::int64_t>();
        if (j.contains("mix")) {
            CategoryMix mix{};
            for (const auto& [name, value] : j.at("mix").items()) {
                const auto c = parse_category(name);
                mix[static_cast<std::size_t>(c)] = value.get<double>();
            }
            spec.mix = mix;
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("corpus spec: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::MalformedRecord) throw Error(ErrorCode::InvalidMix, e.what());
        throw;
    }
    return spec;
}

std::array<std::int64_t, 5> allocate_counts(const CorpusSpec& spec) {
    if (spec.total < 0) throw Error(ErrorCode::InvalidMix, "total must be >= 0");
    double sum = 0.0;
    for (double f : spec.mix) {
        if (!(f >= 0.0) || !std::isfinite(f)) throw Error(ErrorCode::InvalidMix, "fractions must be non-negative");
        sum += f;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw Error(ErrorCode::InvalidMix, "fractions sum to " + std::to_string(sum));

    std::array<std::int64_t, 5> counts{};
    std::array<double, 5> remainders{};
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        const double exact = spec.mix[i] * static_cast<double>(spec.total);
        // Snap values that are integral up to rounding error.
        const double snapped = std::fabs(exact - std::round(exact)) < 1e-6 ? std::round(exact) : exact;
        counts[i] = static_cast<std::int64_t>(std::floor(snapped));
        remainders[i] = snapped - static_cast<double>(counts[i]);
        assigned += counts[i];
    }
    std::array<std::size_t, 5> order{0, 1, 2, 3, 4};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
    for (std::size_t i = 0; assigned < spec.total; i = (i + 1) % 5, ++assigned) ++counts[order[i]];
    return counts;
}

std::vector<RecordDraft> generate_corpus(const CorpusSpec& spec) {
    const auto counts = allocate_counts(spec);
    if (spec.max_age_days < 0.0) throw Error(ErrorCode::InvalidConfig, "max_age_days must be >= 0");
    std::mt19937_64 rng(spec.seed);

    std::vector<Category> labels;
    labels.reserve(static_cast<std::size_t>(spec.total));
    for (std::size_t i = 0; i < 5; ++i) labels.insert(labels.end(), static_cast<std::size_t>(counts[i]), kAllCategories[i]);
    std::shuffle(labels.begin(), labels.end(), rng);

    const auto max_age_s = static_cast<std::int64_t>(spec.max_age_days * 86'400.0);
    std::vector<RecordDraft> drafts;
    drafts.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const Category c = labels[i];
        RecordDraft d;
        char id[16];
        std::snprintf(id, sizeof id, "r%06zu", i);
        d.id = id;
        switch (c) {
            case Category::Important: d.content = important_content(rng); break;
            case Category::Medium: d.content = medium_content(rng); break;
            case Category::General: d.content = general_content(rng); break;
            case Category::Sensitive: d.content = sensitive_content(rng); break;
            case Category::Dangerous: d.content = dangerous_content(rng); break;
        }
        d.category = c;
        d.tool_tag = tool_for(c, rng);

        std::int64_t age_s = 0;
        if (spec.age_profile == AgeProfile::Uniform) {
            age_s = uniform_int(rng, 0, max_age_s);
        } else if (c == Category::Important) {
            age_s = uniform_int(rng, max_age_s / 2 + 1, std::max<std::int64_t>(max_age_s, max_age_s / 2 + 1));
        } else {
            age_s = uniform_int(rng, 0, max_age_s / 2);
        }
        const Timestamp created{spec.base_time.ms - age_s * 1000};
        const std::int64_t since_access_s = age_s - uniform_int(rng, 0, age_s / 2);
        d.created_at = created;
        d.last_accessed_at = Timestamp{spec.base_time.ms - since_access_s * 1000};
        d.usage_frequency = uniform_int(rng, 1, 3);
        if (spec.users > 0) d.user_id = "u" + std::to_string(uniform_int(rng, 0, spec.users - 1));
        drafts.push_back(std::move(d));
    }
    return drafts;
}

std::vector<std::string> generate_queries(std::int64_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
    for (std::int64_t i = 0; i < count; ++i) {
        switch (uniform_int(rng, 0, 2)) {
            case 0:
                out.push_back(std::string("what does my ") + pick(rng, kPlans) + " plan include and what is the " +
                              pick(rng, kQueryTopics));
                break;
            case 1:
                out.push_back(std::string("is the ") + pick(rng, kServices) + " service " + pick(rng, kStatuses) +
                              " on my line");
                break;
            default:
                out.push_back(std::string("where is the ") + pick(rng, kPages) + " page to " + pick(rng, kActions));
                break;
        }
    }
    return out;
}

}  // namespace fsfm
