#include "fsfm/rules.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "fsfm/error.hpp"

namespace fsfm {

namespace {

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        auto u = static_cast<unsigned char>(c);
        if (u < 0x80) c = static_cast<char>(std::tolower(u));
    }
    return out;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

}  // namespace

RuleSet RuleSet::parse(std::string_view text) {
    RuleSet set;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        const auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;

        Rule rule;
        if (line.starts_with("re:")) {
            rule.is_regex = true;
            rule.pattern = std::string(line.substr(3));
            try {
                rule.compiled = std::regex(rule.pattern, std::regex::ECMAScript | std::regex::icase |
                                                             std::regex::optimize);
            } catch (const std::regex_error& e) {
                throw Error(ErrorCode::MalformedRecord,
                            "rule line " + std::to_string(line_no) + ": " + e.what());
            }
        } else {
            rule.pattern = ascii_lower(line);
        }
        set.rules_.push_back(std::move(rule));
        if (end == text.size()) break;
    }
    return set;
}

RuleSet RuleSet::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open rule file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

RuleSet RuleSet::default_dangerous() { return parse(kDefaultDangerousRules); }
RuleSet RuleSet::default_sensitive() { return parse(kDefaultSensitiveRules); }
RuleSet RuleSet::default_refusal() { return parse(kDefaultRefusalRules); }

std::string RuleSet::first_match(std::string_view content) const {
    const std::string lowered = ascii_lower(content);
    for (const auto& rule : rules_) {
        if (rule.is_regex) {
            if (std::regex_search(content.begin(), content.end(), rule.compiled)) return rule.pattern;
        } else if (lowered.find(rule.pattern) != std::string::npos) {
            return rule.pattern;
        }
    }
    return {};
}

bool RuleSet::matches(std::string_view content) const { return !first_match(content).empty(); }

}  // namespace fsfm
