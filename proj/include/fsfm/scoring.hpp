#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>

#include "fsfm/config.hpp"
#include "fsfm/rules.hpp"
#include "fsfm/types.hpp"

namespace fsfm {

inline constexpr double kDangerousPenalty = -10.0;
inline constexpr double kSensitivePenalty = -2.0;

/// Content length (in code points) from which numeric-rich content counts as detailed.
inline constexpr std::size_t kDetailedLength = 40;

struct SecurityVerdict {
    std::optional<Category> hint;  // Dangerous or Sensitive
    double src = 0.0;
};

/// Whitespace-separated token that carries a digit or a currency/percent sign.
bool is_data_token(std::string_view token);
std::size_t count_data_tokens(std::string_view content);

/// Content quality in {0, 1, 2, 3}.
double score_cqa(std::string_view content, const RuleSet& refusal);
/// Business value in {1, 2, 3}.
double score_bve(ToolTag tool);
/// min(2, exp(-lambda * days) * usage_frequency). Throws Error{NegativeElapsedTime}.
double score_trs(Timestamp last_accessed_at, Timestamp now, std::int64_t usage_frequency,
                 double lambda);

SecurityVerdict classify_security(std::string_view content, const RuleSet& dangerous,
                                  const RuleSet& sensitive);

/// Weighted sum of the four dimensions; any record with src == -10 scores exactly -10.
double aggregate_importance(const ScoreBreakdown& breakdown, const Weights& weights);

/// Important and Medium records decay at the long-term rate, the rest at the transient rate.
double decay_rate_for(Category category, const PolicyConfig& config);

/// Recomputes the temporal dimension and the aggregate from the content scores already
/// stored on `record`. Equals Scorer::score when those were produced by the same lexicons.
ScoreBreakdown refresh_temporal(const MemoryRecord& record, const PolicyConfig& config, Timestamp now);

/// Penalty implied by a category label alone.
double category_penalty(Category category);

/// The more severe of two categories under the security ordering
/// Dangerous > Sensitive > any business category.
Category escalate(Category declared, const SecurityVerdict& verdict);

/// Scores records against a fixed set of pattern lexicons.
///
/// Content-only results (security verdict and content quality) are memoized per distinct
/// content string, since the same text is often scored many times. Thread-safe.
class Scorer {
public:
    Scorer();
    Scorer(RuleSet dangerous, RuleSet sensitive, RuleSet refusal);
    ~Scorer();

    Scorer(Scorer&&) noexcept;
    Scorer& operator=(Scorer&&) noexcept;

    SecurityVerdict classify(std::string_view content) const;
    double cqa(std::string_view content) const;

    /// Full breakdown for `record` at `now`. Deterministic.
    ScoreBreakdown score(const MemoryRecord& record, const PolicyConfig& config, Timestamp now) const;
    /// Same, reusing a verdict already computed for `record.content`.
    ScoreBreakdown score(const MemoryRecord& record, const PolicyConfig& config, Timestamp now,
                         const SecurityVerdict& verdict) const;

    const RuleSet& dangerous() const { return dangerous_; }
    const RuleSet& sensitive() const { return sensitive_; }
    const RuleSet& refusal() const { return refusal_; }

private:
    RuleSet dangerous_;
    RuleSet sensitive_;
    RuleSet refusal_;

    struct ContentScores {
        SecurityVerdict verdict;
        double cqa = 0.0;
    };
    struct Memo;
    ContentScores content_scores(std::string_view content) const;
    std::unique_ptr<Memo> memo_;
};

/// Shared instance built from the default lexicons.
const Scorer& default_scorer();

}  // namespace fsfm
