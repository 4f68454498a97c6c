#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dot/corpus.hpp"

namespace dot {

inline constexpr const char* kScorerVersion = "dot-scorer/1 (median-k, ln)";

/// k / ln(1 + tok).
double normalized_dot(std::int64_t k, std::int64_t tok);

/// Throws InvalidTrace for a trace with no steps or no tokens.
DoTScore score(const Trace& trace);

/// Lower-median of k and of tok over self-consistency samples of one
/// (example, teacher) pair; dot_norm is recomputed from the medians.
DoTScore aggregate_self_consistency(std::span<const DoTScore> scores);

struct ScoreError {
    std::string example_id;
    std::string teacher_id;
    std::size_t trace_position = 0;  // index into the input trace list
    std::string message;
};

struct ScoredCorpus {
    std::vector<DoTScore> scores;  // sorted by (example_id, teacher_id)
    std::vector<ScoreError> errors;
};

/// One aggregated score per (example, teacher) group that has at least one
/// valid trace. Bad traces are reported, never fatal.
ScoredCorpus score_corpus(std::span<const Trace> traces);

std::string score_error_to_json(const ScoreError& e);

}  // namespace dot
