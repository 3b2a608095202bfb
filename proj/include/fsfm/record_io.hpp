#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsfm/types.hpp"

namespace fsfm {

nlohmann::json to_json(const MemoryRecord& r);
nlohmann::json to_json(const ScoreBreakdown& s);

/// Strict: every MemoryRecord field must be present. Throws Error{MalformedRecord}.
MemoryRecord record_from_json(const nlohmann::json& j);

/// Lenient: only `id` and `content` are required.
RecordDraft draft_from_json(const nlohmann::json& j);

/// One compact JSON object, no trailing newline.
std::string to_jsonl_line(const MemoryRecord& r);

struct JsonlError {
    std::size_t line = 0;  // 1-based
    std::string message;
};

/// Parses every non-blank line as a draft. Bad lines are reported and skipped.
std::vector<RecordDraft> read_drafts(std::istream& in, std::vector<JsonlError>& errors);

}  // namespace fsfm
