#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "fsfm/audit_log.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = fsfm::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("fsfm_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string rich_line(int i, const std::string& user = "U2") {
    return json{{"id", "r" + std::to_string(100 + i)},
                {"content", "Plan " + std::to_string(i) + ": 20GB data for ¥58 per month, valid 30 days."},
                {"category", "Important"},
                {"tool_tag", "KnowledgeBaseQA"},
                {"created_at", 1700000000},
                {"user_id", user}}
        .dump();
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path);
    for (const auto& l : lines) out << l << '\n';
}

int line_count(const std::string& s) {
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

const std::string kNow = "1700000100";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help exits zero and lists every flag") {
    const auto r = run({"--help"});
    CHECK(r.code == 0);
    for (const char* flag : {"--store", "--input", "--config", "--now", "--text", "--k", "--user", "--dangerous",
                             "--prune", "--lambda", "--events", "--horizon", "--step", "--out", "--manifest"}) {
        CAPTURE(flag);
        CHECK(r.out.find(flag) != std::string::npos);
    }
    CHECK(run({"query", "--help"}).code == 0);
}

TEST_CASE("usage errors exit one") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"query", "--text", "x"}).code == 1);
}

TEST_CASE("ingest clean records") {
    TempDir dir;
    std::vector<std::string> lines;
    for (int i = 0; i < 100; ++i) lines.push_back(rich_line(i));
    write_lines(dir / "in.jsonl", lines);
    const auto r = run({"ingest", "--store", dir / "s.db", "--input", dir / "in.jsonl", "--now", kNow});
    CHECK(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j.at("accepted") == 100);
    CHECK(j.at("purged") == 0);
    CHECK(j.at("pruned") == 0);
    CHECK(fs::exists(dir / "s.db"));
}

TEST_CASE("ingest reports a malformed line and keeps going") {
    TempDir dir;
    std::vector<std::string> lines;
    for (int i = 0; i < 9; ++i) lines.push_back(rich_line(i));
    lines.insert(lines.begin() + 4, "{broken");
    write_lines(dir / "in.jsonl", lines);
    const auto r = run({"ingest", "--store", dir / "s.db", "--input", dir / "in.jsonl", "--now", kNow});
    CHECK(r.code == 2);
    CHECK(json::parse(r.out).at("accepted") == 9);
    CHECK(r.err.find("line 5") != std::string::npos);
}

TEST_CASE("ingest purges dangerous input") {
    TempDir dir;
    write_lines(dir / "in.jsonl", {rich_line(1), R"({"id":"x","content":"[unsafe:guns_illegal_weapons] assembly steps"})"});
    const auto r = run({"ingest", "--store", dir / "s.db", "--input", dir / "in.jsonl", "--now", kNow});
    CHECK(r.code == 0);
    CHECK(json::parse(r.out).at("purged").get<int>() > 0);
}

TEST_CASE("ingest honours config flag and environment") {
    TempDir dir;
    write_lines(dir / "in.jsonl", {rich_line(1), rich_line(2), rich_line(3)});
    write_lines(dir / "bad.json", {R"({"batch_size":0})"});
    CHECK(run({"ingest", "--store", dir / "s.db", "--input", dir / "in.jsonl", "--config", dir / "bad.json"}).code == 2);
    ::setenv("FSFM_CONFIG", (dir / "bad.json").c_str(), 1);
    CHECK(run({"ingest", "--store", dir / "s.db", "--input", dir / "in.jsonl"}).code == 2);
    write_lines(dir / "good.json", {R"({"capacity":3})"});
    // The flag wins over the environment.
    CHECK(run({"ingest", "--store", dir / "s.db", "--input", dir / "in.jsonl", "--config", dir / "good.json",
               "--now", kNow})
              .code == 0);
    ::unsetenv("FSFM_CONFIG");
    CHECK_FALSE(fs::exists(dir / "missing.db"));
    CHECK(run({"ingest", "--store", dir / "s2.db", "--input", dir / "nope.jsonl"}).code == 2);
}

TEST_CASE("query") {
    TempDir dir;
    CHECK(run({"query", "--store", dir / "none.db", "--text", "x", "--k", "3"}).code == 2);

    write_lines(dir / "empty.jsonl", {});
    REQUIRE(run({"ingest", "--store", dir / "e.db", "--input", dir / "empty.jsonl", "--now", kNow}).code == 0);
    const auto empty = run({"query", "--store", dir / "e.db", "--text", "x", "--k", "3"});
    CHECK(empty.code == 0);
    CHECK(empty.out.empty());

    write_lines(dir / "in.jsonl", {rich_line(1), rich_line(2)});
    REQUIRE(run({"ingest", "--store", dir / "s.db", "--input", dir / "in.jsonl", "--now", kNow}).code == 0);
    const auto r = run({"query", "--store", dir / "s.db", "--text",
                        "Plan 1: 20GB data for ¥58 per month, valid 30 days.", "--k", "3"});
    CHECK(r.code == 0);
    CHECK(line_count(r.out) == 2);
    CHECK(r.out.rfind(R"({"id":"r101","similarity":1.000000,"category":"Important"})", 0) == 0);
    CHECK(run({"query", "--store", dir / "s.db", "--text", "x", "--k", "0"}).code == 1);
}

TEST_CASE("forget modes") {
    TempDir dir;
    std::vector<std::string> lines;
    for (int i = 0; i < 7; ++i) lines.push_back(rich_line(i, i < 5 ? "U1" : "U2"));
    write_lines(dir / "in.jsonl", lines);
    REQUIRE(run({"ingest", "--store", dir / "s.db", "--input", dir / "in.jsonl", "--now", kNow}).code == 0);

    CHECK(run({"forget", "--store", dir / "s.db"}).code == 1);
    CHECK(run({"forget", "--store", dir / "s.db", "--dangerous", "--prune"}).code == 1);

    auto r = run({"forget", "--store", dir / "s.db", "--user", "U1", "--now", kNow});
    CHECK(r.code == 0);
    CHECK(json::parse(r.out).at("forgotten") == 5);
    r = run({"forget", "--store", dir / "s.db", "--dangerous", "--now", kNow});
    CHECK(json::parse(r.out).at("forgotten") == 0);
    r = run({"forget", "--store", dir / "s.db", "--prune", "--now", kNow});
    CHECK(json::parse(r.out).at("forgotten") == 0);

    const auto audit = fsfm::AuditLog::read(dir / "s.db.audit.jsonl");
    CHECK(audit.size() == 5);
    CHECK(run({"forget", "--store", dir / "none.db", "--prune"}).code == 2);
}

TEST_CASE("simulate") {
    TempDir dir;
    auto r = run({"simulate", "--lambda", "0.1", "--events", "2:0.95,5:0.90,10:0.85", "--horizon", "15", "--step",
                  "0.5", "--out", dir / "c.csv"});
    CHECK(r.code == 0);
    std::ifstream in(dir / "c.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "day,retention");
    bool saw_day10 = false;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (std::stod(line.substr(0, comma)) == 10.0) {
            saw_day10 = true;
            CHECK(std::stod(line.substr(comma + 1)) == 0.85);
        }
    }
    CHECK(saw_day10);

    r = run({"simulate", "--lambda", "0.1", "--horizon", "15", "--step", "1"});
    CHECK(r.code == 0);
    CHECK(line_count(r.out) == 17);
    CHECK(run({"simulate", "--lambda", "0.1", "--horizon", "15", "--step", "0"}).code == 1);
    CHECK(run({"simulate", "--lambda", "0.1", "--events", "2-0.9", "--horizon", "15"}).code == 1);
    CHECK(run({"simulate", "--lambda", "0.1", "--events", "5:0.9,2:0.95", "--horizon", "15"}).code == 1);
}

TEST_CASE("bench writes reports and rejects bad manifests") {
    TempDir dir;
    write_lines(dir / "m.json", {R"({"corpus":{"total":600},"seeds":[1,2],"query_count":20,"monitor_queries":1})"});
    const auto r = run({"bench", "--manifest", dir / "m.json", "--out", dir / "out"});
    CHECK(r.code == 0);
    CHECK(r.out.find("retention_dangerous") != std::string::npos);
    for (const char* f : {"fsfm_report.csv", "fsfm_report.json", "baseline_report.csv", "baseline_report.json",
                          "fsfm_runs.csv", "baseline_runs.csv", "summary.txt"}) {
        CAPTURE(f);
        CHECK(fs::exists(dir.path / "out" / f));
    }
    std::ifstream runs(dir.path / "out" / "fsfm_runs.csv");
    std::string header, row;
    std::getline(runs, header);
    int rows = 0;
    const auto col = [&] {
        int i = 0;
        std::stringstream ss(header);
        std::string name;
        while (std::getline(ss, name, ',') && name != "storage_fraction") ++i;
        return i;
    }();
    while (std::getline(runs, row)) {
        ++rows;
        std::stringstream ss(row);
        std::string cell;
        for (int i = 0; i <= col; ++i) std::getline(ss, cell, ',');
        CHECK(std::stod(cell) <= 0.70);
    }
    CHECK(rows == 2);

    write_lines(dir / "bad.json", {R"({"corpus":{"total":100,"mix":{"Important":2}}})"});
    CHECK(run({"bench", "--manifest", dir / "bad.json", "--out", dir / "o2"}).code == 2);
    write_lines(dir / "bad2.json", {"{not json"});
    CHECK(run({"bench", "--manifest", dir / "bad2.json", "--out", dir / "o3"}).code == 2);
}

}  // TEST_SUITE
