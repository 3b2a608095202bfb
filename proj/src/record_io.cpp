#include "fsfm/record_io.hpp"

#include <istream>

#include "fsfm/error.hpp"

namespace fsfm {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw Error(ErrorCode::MalformedRecord, std::string("missing field '") + key + "'");
    return *it;
}

template <typename T>
T get_as(const json& v, const char* key) {
    try {
        return v.get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, std::string("field '") + key + "': " + e.what());
    }
}

Timestamp timestamp_from(const json& v, const char* key) {
    if (!v.is_number()) throw Error(ErrorCode::MalformedRecord, std::string("field '") + key + "' must be a number");
    return Timestamp::from_fractional_seconds(v.get<double>());
}

json timestamp_json(Timestamp t) {
    if (t.ms % 1000 == 0) return json(t.ms / 1000);
    return json(t.seconds());
}

ScoreBreakdown score_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::MalformedRecord, "field 'score' must be an object");
    ScoreBreakdown s;
    s.cqa = get_as<double>(require(j, "cqa"), "cqa");
    s.bve = get_as<double>(require(j, "bve"), "bve");
    s.trs = get_as<double>(require(j, "trs"), "trs");
    s.src = get_as<double>(require(j, "src"), "src");
    s.importance = get_as<double>(require(j, "importance"), "importance");
    return s;
}

std::optional<std::string> user_from(const json& j) {
    auto it = j.find("user_id");
    if (it == j.end() || it->is_null()) return std::nullopt;
    return get_as<std::string>(*it, "user_id");
}

}  // namespace

json to_json(const ScoreBreakdown& s) {
    return json{{"cqa", s.cqa}, {"bve", s.bve}, {"trs", s.trs}, {"src", s.src}, {"importance", s.importance}};
}

json to_json(const MemoryRecord& r) {
    json j;
    j["id"] = r.id;
    j["content"] = r.content;
    j["embedding"] = r.embedding;
    j["category"] = to_string(r.category);
    j["tool_tag"] = to_string(r.tool_tag);
    j["created_at"] = timestamp_json(r.created_at);
    j["last_accessed_at"] = timestamp_json(r.last_accessed_at);
    j["usage_frequency"] = r.usage_frequency;
    j["layer"] = to_string(r.layer);
    j["score"] = to_json(r.score);
    j["user_id"] = r.user_id ? json(*r.user_id) : json(nullptr);
    return j;
}

MemoryRecord record_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::MalformedRecord, "record must be a JSON object");
    MemoryRecord r;
    r.id = get_as<std::string>(require(j, "id"), "id");
    r.content = get_as<std::string>(require(j, "content"), "content");
    r.embedding = get_as<std::vector<double>>(require(j, "embedding"), "embedding");
    r.category = parse_category(get_as<std::string>(require(j, "category"), "category"));
    r.tool_tag = parse_tool_tag(get_as<std::string>(require(j, "tool_tag"), "tool_tag"));
    r.created_at = timestamp_from(require(j, "created_at"), "created_at");
    r.last_accessed_at = timestamp_from(require(j, "last_accessed_at"), "last_accessed_at");
    r.usage_frequency = get_as<std::int64_t>(require(j, "usage_frequency"), "usage_frequency");
    r.layer = parse_layer(get_as<std::string>(require(j, "layer"), "layer"));
    r.score = score_from_json(require(j, "score"));
    r.user_id = user_from(j);
    return r;
}

RecordDraft draft_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::MalformedRecord, "record must be a JSON object");
    RecordDraft d;
    d.id = get_as<std::string>(require(j, "id"), "id");
    d.content = get_as<std::string>(require(j, "content"), "content");
    if (d.id.empty()) throw Error(ErrorCode::MalformedRecord, "empty id");
    if (auto it = j.find("embedding"); it != j.end() && !it->is_null()) {
        d.embedding = get_as<std::vector<double>>(*it, "embedding");
    }
    if (auto it = j.find("category"); it != j.end() && !it->is_null()) {
        d.category = parse_category(get_as<std::string>(*it, "category"));
    }
    if (auto it = j.find("tool_tag"); it != j.end() && !it->is_null()) {
        d.tool_tag = parse_tool_tag(get_as<std::string>(*it, "tool_tag"));
    }
    if (auto it = j.find("created_at"); it != j.end() && !it->is_null()) {
        d.created_at = timestamp_from(*it, "created_at");
    }
    if (auto it = j.find("last_accessed_at"); it != j.end() && !it->is_null()) {
        d.last_accessed_at = timestamp_from(*it, "last_accessed_at");
    }
    if (auto it = j.find("usage_frequency"); it != j.end() && !it->is_null()) {
        d.usage_frequency = get_as<std::int64_t>(*it, "usage_frequency");
    }
    d.user_id = user_from(j);
    return d;
}

std::string to_jsonl_line(const MemoryRecord& r) { return to_json(r).dump(); }

std::vector<RecordDraft> read_drafts(std::istream& in, std::vector<JsonlError>& errors) {
    std::vector<RecordDraft> drafts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            drafts.push_back(draft_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            errors.push_back({line_no, e.what()});
        } catch (const Error& e) {
            errors.push_back({line_no, e.what()});
        }
    }
    return drafts;
}

}  // namespace fsfm
