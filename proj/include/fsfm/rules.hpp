#pragma once

#include <filesystem>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace fsfm {

/// A list of content patterns loaded from a plain-text rule file.
///
/// File syntax, one rule per line:
///   # comment
///   literal phrase          matched case-insensitively as a substring
///   re:<ECMAScript regex>   matched case-insensitively anywhere in the text
class RuleSet {
public:
    struct Rule {
        std::string pattern;
        bool is_regex = false;
        std::regex compiled;
    };

    RuleSet() = default;

    /// Throws Error{MalformedRecord} naming the line of an invalid regex.
    static RuleSet parse(std::string_view text);
    static RuleSet load(const std::filesystem::path& path);

    static RuleSet default_dangerous();
    static RuleSet default_sensitive();
    static RuleSet default_refusal();

    bool matches(std::string_view content) const;
    /// Pattern text of the first matching rule, or empty.
    std::string first_match(std::string_view content) const;

    const std::vector<Rule>& rules() const { return rules_; }
    std::size_t size() const { return rules_.size(); }

private:
    std::vector<Rule> rules_;
};

/// Shipped rule-file contents, identical to the files under rules/.
extern const std::string_view kDefaultDangerousRules;
extern const std::string_view kDefaultSensitiveRules;
extern const std::string_view kDefaultRefusalRules;

}  // namespace fsfm
