#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "dot/corpus.hpp"
#include "dot/segmenter.hpp"

namespace dot {

struct PromptTemplate {
    std::string template_id;
    std::string system_text;
    std::string user_text;  // exactly one {prompt}
    std::string enforces;

    void validate() const;
};

/// Built-in template asking for one numbered step per line.
PromptTemplate default_template();

/// Reads a JSONL file of {template_id, system_text, user_text, enforces}.
std::vector<PromptTemplate> read_templates(const std::filesystem::path& path);

struct RenderedPrompt {
    std::string system_text;
    std::string user_text;
};

/// Single-pass substitution of {prompt}; the example prompt is inserted
/// verbatim and never re-scanned.
RenderedPrompt render_prompt(const PromptTemplate& tmpl, const Example& example);

/// Grants request starts at least 1/rate seconds apart across all threads,
/// measured between actual grant instants.
class RateLimiter {
public:
    using Clock = std::chrono::steady_clock;

    explicit RateLimiter(double requests_per_second);
    /// Blocks until the next slot; returns the grant instant.
    Clock::time_point acquire();
    /// Every grant so far, in order.
    std::vector<Clock::time_point> grants() const;

private:
    mutable std::mutex mutex_;
    Clock::duration interval_;
    Clock::time_point next_;
    std::vector<Clock::time_point> grants_;
};

struct HarvestJob {
    std::filesystem::path corpus_path;
    TeacherProfile teacher;
    /// One or more templates; each template x sample is one request.
    std::vector<PromptTemplate> templates{default_template()};
    std::filesystem::path cache_dir;
    double rate_limit = 2.0;  // requests per second
    int max_retries = 3;
    int concurrency = 4;
    std::string api_key_env = "OPENAI_API_KEY";
    std::chrono::milliseconds backoff_base{250};
    std::chrono::milliseconds request_timeout{60000};
    SegmentationRules rules;

    void validate() const;
};

struct HarvestFailure {
    std::string example_id;
    std::string teacher_id;
    std::string template_id;
    int sample_index = 0;
    int attempts = 0;
    std::string reason;
};

struct HarvestResult {
    std::vector<Trace> traces;  // (example, template, sample) order
    std::vector<HarvestFailure> failures;
    std::size_t requests = 0;    // network requests sent, retries included
    std::size_t cache_hits = 0;
    std::vector<std::chrono::steady_clock::time_point> request_times;  // rate-limiter grants

    bool partial() const { return !failures.empty(); }
};

/// Cache key: SHA-256 over (model, template, rendered prompt, sample index).
std::string cache_key(const std::string& model, const PromptTemplate& tmpl, const RenderedPrompt& prompt,
                      int sample_index);

/// Collects samples_per_example completions per example and template from
/// {endpoint_url}/chat/completions. 429/5xx and transport errors are retried
/// with exponential backoff; what still fails is reported, not thrown.
/// Throws Startup when the API key variable is unset.
HarvestResult harvest(const HarvestJob& job);
HarvestResult harvest(const HarvestJob& job, std::span<const Example> examples);

std::string failure_to_json(const HarvestFailure& f);

}  // namespace dot
