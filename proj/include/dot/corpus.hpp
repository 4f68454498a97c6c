#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dot/error.hpp"

namespace dot {

/// One training item.
struct Example {
    std::string id;
    std::string task;
    std::string prompt;
    std::optional<std::string> reference_answer;
    std::optional<double> external_difficulty;
    std::optional<double> judge_score;
    std::size_t token_length_prompt = 0;

    bool operator==(const Example&) const = default;
};

struct Step {
    int index = 1;
    std::string text;

    bool operator==(const Step&) const = default;
};

enum class SegmentationMode { Numbered, Labeled, Bulleted, ParagraphFallback };
enum class Confidence { High, Low };

const char* to_string(SegmentationMode mode);
const char* to_string(Confidence confidence);
SegmentationMode parse_segmentation_mode(std::string_view s);
Confidence parse_confidence(std::string_view s);

/// A teacher's reasoning output for one example, already split into steps.
struct Trace {
    std::string example_id;
    std::string teacher_id;
    std::string raw_text;
    std::vector<Step> steps;
    std::int64_t tok = 0;
    SegmentationMode segmentation_mode = SegmentationMode::ParagraphFallback;
    Confidence confidence = Confidence::Low;

    bool operator==(const Trace&) const = default;
};

/// Depth-of-thought score for one (example, teacher) pair.
/// dot_norm = k / ln(1 + tok).
struct DoTScore {
    std::string example_id;
    std::string teacher_id;
    std::int64_t k = 0;
    std::int64_t tok = 0;
    double dot_norm = 0.0;
    std::int64_t n_samples = 1;

    bool operator==(const DoTScore&) const = default;
};

struct TeacherProfile {
    std::string teacher_id;
    std::string endpoint_url;
    std::string model_name;
    std::string template_id;
    int samples_per_example = 1;
    double temperature = 0.0;
};

/// Throws Validation if the profile breaks its invariants.
void validate(const TeacherProfile& profile);
bool is_valid_url(std::string_view url);

/// Number of maximal runs of non-whitespace code points, where whitespace
/// is the Unicode White_Space property. Invalid UTF-8 bytes count as
/// non-whitespace.
std::size_t count_tokens(std::string_view text);
bool is_unicode_space(char32_t cp);

// JSONL persistence. Readers report the 1-based line number on failure.
// Optional fields are omitted when absent, never written as null.
std::vector<Example> read_corpus(const std::filesystem::path& path);
void write_corpus(const std::vector<Example>& examples, const std::filesystem::path& path);
std::vector<Trace> read_traces(const std::filesystem::path& path);
void write_traces(const std::vector<Trace>& traces, const std::filesystem::path& path);
std::vector<DoTScore> read_scores(const std::filesystem::path& path);
void write_scores(const std::vector<DoTScore>& scores, const std::filesystem::path& path);

// Line-level codecs, shared by the file readers and the CLI.
std::string example_to_json(const Example& e);
Example example_from_json(std::string_view line);
std::string trace_to_json(const Trace& t);
Trace trace_from_json(std::string_view line);
std::string score_to_json(const DoTScore& s);
DoTScore score_from_json(std::string_view line);

/// Reads non-empty lines; a trailing CR is stripped.
std::vector<std::string> read_lines(const std::filesystem::path& path);
/// Writes each line followed by LF via a temp file and rename.
void write_lines(const std::vector<std::string>& lines, const std::filesystem::path& path);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace dot
