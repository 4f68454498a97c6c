#include <doctest.h>

#include <random>
#include <set>

#include <json.hpp>

#include "dot/segmenter.hpp"
#include "test_util.hpp"

using namespace dot;

namespace {

std::string renumber(const std::vector<Step>& steps) {
    std::string out;
    for (const auto& s : steps) out += std::to_string(s.index) + ". " + s.text + "\n";
    return out;
}

std::string random_sentence(std::mt19937_64& rng) {
    static const std::vector<std::string> words = {"add", "the", "terms", "x=3", "then", "check", "$a+b$",
                                                   "result", "is", "\xCF\x80", "so", "we", "carry"};
    std::string s;
    const int n = 2 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) s += (i ? " " : "") + words[rng() % words.size()];
    return s + ".";
}

}  // namespace

TEST_CASE("segment: worked examples") {
    auto s = segment("1. Compute 2+3.\n2. The answer is 5.");
    REQUIRE(s.steps.size() == 2);
    CHECK(s.mode == SegmentationMode::Numbered);
    CHECK(s.confidence == Confidence::High);
    CHECK(s.steps[0].text == "Compute 2+3.");
    CHECK(s.steps[1].text == "The answer is 5.");

    s = segment("Step 1: read. Step 2: plan. Step 3: solve.");
    REQUIRE(s.steps.size() == 3);
    CHECK(s.mode == SegmentationMode::Labeled);
    CHECK(s.confidence == Confidence::High);
    CHECK(s.steps[2].text == "solve.");

    s = segment("We first restate the problem.\n\nThen we solve it.\n\nThe answer is 12.");
    CHECK(s.steps.size() == 3);
    CHECK(s.mode == SegmentationMode::ParagraphFallback);
    CHECK(s.confidence == Confidence::Low);

    s = segment("1. a\n3. c");
    CHECK(s.steps.size() == 2);
    CHECK(s.confidence == Confidence::Low);
}

TEST_CASE("segment: errors") {
    CHECK_THROWS_AS(segment(""), Error);
    try {
        segment(" \n\t ");
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyTrace);
    }
    SegmentationRules strict;
    strict.allow_paragraph_fallback = false;
    try {
        segment("no markers here at all", strict);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoMarkers);
    }
    SegmentationRules none;
    none.marker_patterns.clear();
    CHECK_THROWS_AS(segment("1. x", none), Error);
}

TEST_CASE("segment: preamble folds into the first step and markers are stripped") {
    const auto s = segment("Let us begin.\n1. Multiply 3 by 4.\n2. Subtract 2.");
    REQUIRE(s.steps.size() == 2);
    CHECK(s.steps[0].text == "Let us begin.\nMultiply 3 by 4.");
    CHECK(s.steps[0].index == 1);
    CHECK(s.steps[1].index == 2);
}

TEST_CASE("segment: micro-steps merge into the preceding step") {
    const auto s = segment("1. Compute the sum.\n2.\n3. Report it.");
    REQUIRE(s.steps.size() == 2);
    CHECK(s.steps[0].text == "Compute the sum.");
    CHECK(s.steps[1].text == "Report it.");
    CHECK(s.steps[1].index == 2);

    SegmentationRules loose;
    loose.min_step_chars = 12;
    const auto t = segment("1. tiny\n2. a much longer step here", loose);
    REQUIRE(t.steps.size() == 1);
    CHECK(t.steps[0].text == "tiny\na much longer step here");
}

TEST_CASE("segment: priority order is configurable") {
    const std::string text = "- Step 1: first\n- Step 2: second";
    CHECK(segment(text).mode == SegmentationMode::Labeled);
    SegmentationRules bullets_first;
    bullets_first.marker_patterns = {MarkerStyle::Dash, MarkerStyle::StepLabel};
    CHECK(segment(text, bullets_first).mode == SegmentationMode::Bulleted);
}

TEST_CASE("segment: bundled hand-labeled corpus") {
    const auto lines = read_lines(std::filesystem::path(DOT_TEST_DATA_DIR) / "segmenter_cases.jsonl");
    REQUIRE(lines.size() >= 60);
    for (const auto& line : lines) {
        const auto c = nlohmann::json::parse(line);
        const auto name = c.at("name").get<std::string>();
        INFO(name);
        const auto s = segment(c.at("text").get<std::string>());
        CHECK(s.steps.size() == c.at("k").get<std::size_t>());
        CHECK(to_string(s.mode) == c.at("mode").get<std::string>());
        CHECK(to_string(s.confidence) == c.at("confidence").get<std::string>());
        for (const auto& step : s.steps) CHECK_FALSE(step.text.empty());
    }
}

TEST_CASE("segment: properties over generated numbered traces") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const int k = 1 + static_cast<int>(rng() % 12);
        std::string raw;
        std::size_t marker_chars = 0;
        const bool preamble = rng() % 3 == 0;
        if (preamble) raw += random_sentence(rng) + "\n";
        for (int i = 1; i <= k; ++i) {
            const auto marker = std::to_string(i) + ".";
            marker_chars += visible_length(marker);
            raw += marker + " " + random_sentence(rng) + (rng() % 4 == 0 ? "\n\n" : "\n");
        }
        INFO(raw);
        const auto s = segment(raw);
        REQUIRE(s.steps.size() == static_cast<std::size_t>(k));
        CHECK(s.confidence == Confidence::High);

        // No content loss.
        std::size_t step_chars = 0;
        for (const auto& st : s.steps) step_chars += visible_length(st.text);
        CHECK(step_chars + marker_chars == visible_length(raw));

        // Idempotence.
        CHECK(segment(renumber(s.steps)).steps.size() == s.steps.size());

        // Appending the (k+1)-th step adds exactly one.
        const auto longer = segment(raw + std::to_string(k + 1) + ". " + random_sentence(rng));
        CHECK(longer.steps.size() == s.steps.size() + 1);
        CHECK(longer.confidence == Confidence::High);
    }
}

TEST_CASE("segment: paragraph fallback keeps all content") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 6);
        std::string raw;
        for (int i = 0; i < n; ++i) raw += random_sentence(rng) + "\n" + random_sentence(rng) + "\n\n";
        const auto s = segment(raw);
        CHECK(s.steps.size() == static_cast<std::size_t>(n));
        std::size_t chars = 0;
        for (const auto& st : s.steps) chars += visible_length(st.text);
        CHECK(chars == visible_length(raw));
    }
}

TEST_CASE("make_trace fills token count") {
    const auto t = make_trace("e", "t", "1. Add 2 and 3.\n2. Get 5.");
    CHECK(t.tok == 8);
    CHECK(t.steps.size() == 2);
    CHECK(t.segmentation_mode == SegmentationMode::Numbered);
}

TEST_CASE("audit_sample") {
    std::vector<Trace> traces;
    for (int i = 0; i < 10; ++i) {
        Trace t;
        t.example_id = "e" + std::to_string(i);
        t.teacher_id = "t";
        t.confidence = (i == 3 || i == 8) ? Confidence::Low : Confidence::High;
        traces.push_back(t);
    }

    SUBCASE("fraction 0.2 at seed 7 yields exactly the low-confidence traces") {
        const auto picked = audit_sample(traces, 0.2, 7);
        REQUIRE(picked.size() == 2);
        CHECK(picked[0].example_id == "e3");
        CHECK(picked[1].example_id == "e8");
    }
    SUBCASE("fraction 1 yields everything, low first") {
        const auto picked = audit_sample(traces, 1.0, 7);
        REQUIRE(picked.size() == 10);
        CHECK(picked[0].example_id == "e3");
        CHECK(picked[1].example_id == "e8");
        std::set<std::string> ids;
        for (const auto& t : picked) ids.insert(t.example_id);
        CHECK(ids.size() == 10);
    }
    SUBCASE("partial fills are seeded, sorted and distinct") {
        const auto a = audit_sample(traces, 0.5, 99);
        const auto b = audit_sample(traces, 0.5, 99);
        REQUIRE(a.size() == 5);
        CHECK(a == b);
        CHECK(a[0].example_id == "e3");
        CHECK(a[1].example_id == "e8");
        for (std::size_t i = 3; i < a.size(); ++i) CHECK(a[i - 1].example_id < a[i].example_id);
        std::set<std::string> seen;
        for (int seed = 0; seed < 20; ++seed) {
            std::string key;
            for (const auto& t : audit_sample(traces, 0.5, static_cast<std::uint64_t>(seed))) key += t.example_id;
            seen.insert(key);
        }
        CHECK(seen.size() > 1);
    }
    SUBCASE("invalid fractions") {
        CHECK_THROWS_AS(audit_sample(traces, 0.0, 1), Error);
        CHECK_THROWS_AS(audit_sample(traces, 1.5, 1), Error);
        CHECK_THROWS_AS(audit_sample(std::vector<Trace>{}, 0.5, 1), Error);
    }
}
