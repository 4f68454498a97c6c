#include <doctest.h>

#include <sstream>

#include "cli.hpp"
#include "dot/mock_endpoint.hpp"
#include "dot/scheduler.hpp"
#include "test_util.hpp"

using namespace dot;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = dot::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

const std::string kSynthetic = std::string(DOT_SOURCE_DIR) + "/data/synthetic";

// segment -> score -> bucket -> schedule -> baseline inside `dir`.
void pipeline(const std::filesystem::path& dir) {
    const auto w = dir.string();
    REQUIRE(invoke({"--workdir", w, "segment", "--in", kSynthetic + "/raw_traces.jsonl", "--out", "traces.jsonl"}).code == 0);
    REQUIRE(invoke({"--workdir", w, "score", "--traces", "traces.jsonl", "--out", "scores.jsonl"}).code == 0);
    REQUIRE(invoke({"--workdir", w, "bucket", "--scores", "scores.jsonl", "--corpus", kSynthetic + "/corpus.jsonl",
                 "--max-task-share", "0.4", "--out", "buckets.jsonl", "--report", "report.txt", "--report-json",
                 "report.json"})
                .code == 0);
    REQUIRE(invoke({"--workdir", w, "schedule", "--buckets", "buckets.jsonl", "--corpus", kSynthetic + "/corpus.jsonl",
                 "--mode", "mixed", "--alpha", "2", "--budget", "60", "--seed", "42", "--out", "manifest.jsonl",
                 "--summary", "summary.txt"})
                .code == 0);
    REQUIRE(invoke({"--workdir", w, "baseline", "--corpus", kSynthetic + "/corpus.jsonl", "--traces", "traces.jsonl",
                 "--kind", "random", "--phases", "3", "--budget", "60", "--seed", "42", "--out", "random.jsonl",
                 "--summary", "random.txt"})
                .code == 0);
}

}  // namespace

TEST_CASE("cli: help and usage errors") {
    auto r = invoke({"--help"});
    CHECK(r.code == cli::kOk);
    CHECK(r.out.find("schedule") != std::string::npos);
    r = invoke({"schedule", "--help"});
    CHECK(r.code == cli::kOk);
    CHECK(r.out.find("--alpha") != std::string::npos);

    CHECK(invoke({}).code == cli::kUsage);
    CHECK(invoke({"frobnicate"}).code == cli::kUsage);
    CHECK(invoke({"score", "--traces", "x.jsonl"}).code == cli::kUsage);
    CHECK(invoke({"schedule", "--buckets", "b", "--budget", "3", "--out", "m", "--mode", "sideways"}).code == cli::kUsage);
    CHECK(invoke({"schedule", "--buckets", "b", "--budget", "many", "--out", "m"}).code == cli::kUsage);
}

TEST_CASE("cli: validation failures exit 1 with the error kind") {
    testutil::TempDir dir;
    testutil::write_file(dir / "corpus.jsonl", "{\"id\":\"a\",\"task\":\"m\",\"prompt\":\"p\"}\n{\"id\":\"a\",\"task\":\"m\",\"prompt\":\"q\"}\n");
    testutil::write_file(dir / "scores.jsonl", "");
    auto r = invoke({"--workdir", dir.path().string(), "bucket", "--scores", "scores.jsonl", "--corpus", "corpus.jsonl",
                  "--out", "b.jsonl"});
    CHECK(r.code == cli::kValidationFailure);
    CHECK(r.err.find("error (validation)") != std::string::npos);

    r = invoke({"--workdir", dir.path().string(), "filter", "--scores", "missing.jsonl", "--max-k", "2"});
    CHECK(r.code == cli::kValidationFailure);
    CHECK(r.err.find("error (io)") != std::string::npos);
}

TEST_CASE("cli: partial failures exit 2") {
    testutil::TempDir dir;
    testutil::write_file(dir / "raw.jsonl",
                         "{\"example_id\":\"a\",\"teacher_id\":\"t\",\"raw_text\":\"1. Add the numbers.\\n2. Done here.\"}\n"
                         "{\"example_id\":\"b\",\"teacher_id\":\"t\",\"raw_text\":\"   \"}\n");
    const auto w = dir.path().string();
    auto r = invoke({"--workdir", w, "segment", "--in", "raw.jsonl", "--out", "traces.jsonl"});
    CHECK(r.code == cli::kPartialFailure);
    CHECK(read_traces(dir / "traces.jsonl").size() == 1);
    CHECK(testutil::read_file(dir / "segment_errors.jsonl").find("\"b\"") != std::string::npos);
}

TEST_CASE("cli: full pipeline is byte-deterministic") {
    testutil::TempDir a, b;
    pipeline(a.path());
    pipeline(b.path());
    for (const char* f : {"traces.jsonl", "scores.jsonl", "buckets.jsonl", "overflow.jsonl", "report.txt", "report.json",
                          "manifest.jsonl", "summary.txt", "random.jsonl"}) {
        INFO(f);
        CHECK(testutil::read_file(a / f) == testutil::read_file(b / f));
    }
    const auto m = read_manifest(a / "manifest.jsonl");
    CHECK(m.phases.size() == 3);
    CHECK(m.provenance.config.at("seed") == "42");
    CHECK(m.provenance.config.at("mode") == "mixed");
    CHECK(m.provenance.corpus_hash.size() == 64);
    CHECK(m.provenance.bucket_spec == "1-3,4-6,7+");
    const auto base = read_manifest(a / "random.jsonl");
    for (std::size_t t = 0; t < 3; ++t) CHECK(base.phases[t].ids.size() == m.phases[t].ids.size());
}

TEST_CASE("cli: config file supplies defaults and flags override it") {
    testutil::TempDir dir;
    pipeline(dir.path());
    const auto w = dir.path().string();
    testutil::write_file(dir / "cfg.toml", "[schedule]\nbudget = 10\nseed = 5\nmode = \"staged\"\n");
    auto r = invoke({"--workdir", w, "--config", (dir / "cfg.toml").string(), "schedule", "--buckets", "buckets.jsonl",
                  "--out", "m1.jsonl"});
    REQUIRE(r.code == 0);
    auto m = read_manifest(dir / "m1.jsonl");
    CHECK(m.plan.budget_per_phase == 10);
    CHECK(m.plan.seed == 5);
    CHECK(m.plan.mode == ScheduleMode::Staged);

    r = invoke({"--workdir", w, "--config", (dir / "cfg.toml").string(), "schedule", "--buckets", "buckets.jsonl",
             "--out", "m2.jsonl", "--budget", "7"});
    REQUIRE(r.code == 0);
    m = read_manifest(dir / "m2.jsonl");
    CHECK(m.plan.budget_per_phase == 7);
    CHECK(m.plan.seed == 5);
    CHECK(m.provenance.config.at("budget") == "7");
}

TEST_CASE("cli: filter and analyze") {
    testutil::TempDir dir;
    pipeline(dir.path());
    const auto w = dir.path().string();
    auto r = invoke({"--workdir", w, "filter", "--scores", "scores.jsonl", "--max-k", "2"});
    REQUIRE(r.code == 0);
    const auto scores = read_scores(dir / "scores.jsonl");
    std::size_t expected = 0;
    for (const auto& s : scores) expected += s.k <= 2;
    CHECK(static_cast<std::size_t>(std::count(r.out.begin(), r.out.end(), '\n')) == expected);
    CHECK(invoke({"--workdir", w, "filter", "--scores", "scores.jsonl", "--min-k", "3", "--max-k", "2"}).code == 1);

    r = invoke({"--workdir", w, "analyze", "--what", "label", "--scores", "scores.jsonl", "--corpus",
             kSynthetic + "/corpus.jsonl", "--min-spearman", "0.85", "--out", "label.json"});
    CHECK(r.code == 0);
    CHECK(r.out.find("spearman(k, label)") != std::string::npos);
    CHECK(testutil::read_file(dir / "label.json").find("partial_k") != std::string::npos);
    r = invoke({"--workdir", w, "analyze", "--what", "label", "--scores", "scores.jsonl", "--corpus",
             kSynthetic + "/corpus.jsonl", "--min-spearman", "0.999"});
    CHECK(r.code == cli::kValidationFailure);
    r = invoke({"--workdir", w, "analyze", "--what", "teachers", "--scores", "scores.jsonl"});
    CHECK(r.code == cli::kValidationFailure);
    CHECK(r.err.find("error (parameter)") != std::string::npos);
}

TEST_CASE("cli: harvest against the mock endpoint") {
    MockEndpoint mock;
    testutil::TempDir dir;
    const auto w = dir.path().string();
    testutil::write_file(dir / "corpus.jsonl", "{\"id\":\"a\",\"task\":\"m\",\"prompt\":\"[depth=3] go\"}\n"
                                               "{\"id\":\"b\",\"task\":\"m\",\"prompt\":\"[depth=5] go\"}\n");
    ::setenv("DOT_CLI_TEST_KEY", "k", 1);
    auto r = invoke({"--workdir", w, "harvest", "--corpus", "corpus.jsonl", "--out", "traces.jsonl", "--teacher-id", "mock",
                  "--endpoint", mock.url(), "--model", "m", "--samples", "2", "--rate-limit", "100",
                  "--api-key-env", "DOT_CLI_TEST_KEY"});
    CHECK(r.code == cli::kOk);
    const auto traces = read_traces(dir / "traces.jsonl");
    REQUIRE(traces.size() == 4);
    CHECK(traces[0].steps.size() == 3);
    CHECK(traces[3].steps.size() == 5);
    CHECK(r.err.find("4 requests") != std::string::npos);

    MockEndpointOptions down;
    down.always_status = 503;
    MockEndpoint failing(down);
    r = invoke({"--workdir", w, "harvest", "--corpus", "corpus.jsonl", "--out", "t2.jsonl", "--teacher-id", "mock",
             "--endpoint", failing.url(), "--model", "m", "--rate-limit", "100", "--max-retries", "1", "--backoff-ms",
             "1", "--cache-dir", "other-cache", "--api-key-env", "DOT_CLI_TEST_KEY"});
    CHECK(r.code == cli::kPartialFailure);
    CHECK(testutil::read_file(dir / "harvest_failures.jsonl").find("503") != std::string::npos);

    ::unsetenv("DOT_CLI_TEST_KEY_UNSET");
    r = invoke({"--workdir", w, "harvest", "--corpus", "corpus.jsonl", "--out", "t3.jsonl", "--teacher-id", "mock",
             "--endpoint", mock.url(), "--model", "m", "--api-key-env", "DOT_CLI_TEST_KEY_UNSET"});
    CHECK(r.code == cli::kValidationFailure);
    CHECK(r.err.find("error (startup)") != std::string::npos);
}
