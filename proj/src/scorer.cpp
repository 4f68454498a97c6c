#include "dot/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include <json.hpp>

namespace dot {

double normalized_dot(std::int64_t k, std::int64_t tok) {
    return static_cast<double>(k) / std::log1p(static_cast<double>(tok));
}

DoTScore score(const Trace& trace) {
    const auto k = static_cast<std::int64_t>(trace.steps.size());
    if (k < 1)
        throw Error(ErrorKind::InvalidTrace,
                    "trace " + trace.example_id + "/" + trace.teacher_id + " has no steps");
    if (trace.tok < 1)
        throw Error(ErrorKind::InvalidTrace,
                    "trace " + trace.example_id + "/" + trace.teacher_id + " has no tokens");
    DoTScore s;
    s.example_id = trace.example_id;
    s.teacher_id = trace.teacher_id;
    s.k = k;
    s.tok = trace.tok;
    s.dot_norm = normalized_dot(k, trace.tok);
    s.n_samples = 1;
    return s;
}

namespace {

std::int64_t lower_median(std::vector<std::int64_t> v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

}  // namespace

DoTScore aggregate_self_consistency(std::span<const DoTScore> scores) {
    if (scores.empty()) throw Error(ErrorKind::Aggregation, "no scores to aggregate");
    const auto& first = scores.front();
    std::vector<std::int64_t> ks;
    std::vector<std::int64_t> toks;
    std::int64_t samples = 0;
    for (const auto& s : scores) {
        if (s.example_id != first.example_id || s.teacher_id != first.teacher_id)
            throw Error(ErrorKind::Aggregation, "cannot aggregate scores of " + first.example_id + "/" +
                                                    first.teacher_id + " with " + s.example_id + "/" +
                                                    s.teacher_id);
        ks.push_back(s.k);
        toks.push_back(s.tok);
        samples += s.n_samples;
    }
    DoTScore out;
    out.example_id = first.example_id;
    out.teacher_id = first.teacher_id;
    out.k = lower_median(std::move(ks));
    out.tok = lower_median(std::move(toks));
    out.dot_norm = normalized_dot(out.k, out.tok);
    out.n_samples = samples;
    return out;
}

ScoredCorpus score_corpus(std::span<const Trace> traces) {
    std::map<std::pair<std::string, std::string>, std::vector<DoTScore>> groups;
    ScoredCorpus out;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& t = traces[i];
        auto& group = groups[{t.example_id, t.teacher_id}];
        try {
            group.push_back(score(t));
        } catch (const Error& e) {
            out.errors.push_back({t.example_id, t.teacher_id, i, e.what()});
        }
    }
    for (const auto& [key, group] : groups) {
        if (!group.empty()) out.scores.push_back(aggregate_self_consistency(group));
    }
    return out;
}

std::string score_error_to_json(const ScoreError& e) {
    nlohmann::ordered_json j;
    j["example_id"] = e.example_id;
    j["teacher_id"] = e.teacher_id;
    j["trace_position"] = e.trace_position;
    j["error"] = e.message;
    return j.dump();
}

}  // namespace dot
