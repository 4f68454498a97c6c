#include "dot/harvester.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <optional>
#include <regex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace dot {

using json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kPlaceholder = "{prompt}";

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + needle.size()))
        ++n;
    return n;
}

}  // namespace

void PromptTemplate::validate() const {
    if (template_id.empty()) throw Error(ErrorKind::Template, "template_id is empty");
    const auto n = count_occurrences(user_text, kPlaceholder);
    if (n != 1)
        throw Error(ErrorKind::Template, "template '" + template_id + "' must contain exactly one {prompt}, found " +
                                             std::to_string(n));
    if (enforces.empty()) throw Error(ErrorKind::Template, "template '" + template_id + "' has no format contract");
}

PromptTemplate default_template() {
    return {"numbered-v1",
            "You are a careful teacher. Solve the problem step by step. Write every reasoning step as a "
            "numbered list item (1., 2., 3., ...), one step per line, with no other list markers. "
            "Do not number anything that is not a reasoning step.",
            "Problem:\n{prompt}\n\nGive your numbered reasoning steps, then state the final answer in the last step.",
            "numbered list, one step per line"};
}

std::vector<PromptTemplate> read_templates(const std::filesystem::path& path) {
    std::vector<PromptTemplate> out;
    for (const auto& line : read_lines(path)) {
        try {
            const auto j = json::parse(line);
            PromptTemplate t{j.at("template_id").get<std::string>(), j.value("system_text", std::string()),
                             j.at("user_text").get<std::string>(), j.at("enforces").get<std::string>()};
            t.validate();
            out.push_back(std::move(t));
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Template, path.string() + ": " + e.what());
        }
    }
    if (out.empty()) throw Error(ErrorKind::Template, path.string() + ": no templates");
    return out;
}

RenderedPrompt render_prompt(const PromptTemplate& tmpl, const Example& example) {
    tmpl.validate();
    const auto pos = tmpl.user_text.find(kPlaceholder);
    std::string user;
    user.reserve(tmpl.user_text.size() + example.prompt.size());
    user.append(tmpl.user_text, 0, pos);
    user.append(example.prompt);
    user.append(tmpl.user_text, pos + kPlaceholder.size());
    return {tmpl.system_text, std::move(user)};
}

RateLimiter::RateLimiter(double requests_per_second) {
    if (!(requests_per_second > 0.0) || !std::isfinite(requests_per_second))
        throw Error(ErrorKind::Parameter, "rate limit must be > 0");
    interval_ = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / requests_per_second));
    next_ = Clock::now();
}

RateLimiter::Clock::time_point RateLimiter::acquire() {
    // The lock is held across the sleep so the next grant is measured from
    // this one's actual wake-up, not from its planned slot.
    std::lock_guard lock(mutex_);
    std::this_thread::sleep_until(next_);
    const auto now = Clock::now();
    next_ = now + interval_;
    grants_.push_back(now);
    return now;
}

std::vector<RateLimiter::Clock::time_point> RateLimiter::grants() const {
    std::lock_guard lock(mutex_);
    return grants_;
}

void HarvestJob::validate() const {
    dot::validate(teacher);
    if (templates.empty()) throw Error(ErrorKind::Parameter, "harvest job has no templates");
    for (const auto& t : templates) t.validate();
    if (!(rate_limit > 0.0)) throw Error(ErrorKind::Parameter, "rate_limit must be > 0");
    if (max_retries < 0) throw Error(ErrorKind::Parameter, "max_retries must be >= 0");
    if (concurrency < 1) throw Error(ErrorKind::Parameter, "concurrency must be >= 1");
    if (cache_dir.empty()) throw Error(ErrorKind::Parameter, "cache_dir is required");
    rules.validate();
}

std::string cache_key(const std::string& model, const PromptTemplate& tmpl, const RenderedPrompt& prompt,
                      int sample_index) {
    json j = json::array({model, tmpl.template_id, tmpl.system_text, tmpl.user_text, prompt.system_text,
                          prompt.user_text, sample_index});
    return sha256_hex(j.dump());
}

std::string failure_to_json(const HarvestFailure& f) {
    json j;
    j["example_id"] = f.example_id;
    j["teacher_id"] = f.teacher_id;
    j["template_id"] = f.template_id;
    j["sample_index"] = f.sample_index;
    j["attempts"] = f.attempts;
    j["reason"] = f.reason;
    return j.dump();
}

namespace {

struct Endpoint {
    std::string base;         // scheme://host[:port]
    std::string path_prefix;  // "" or "/v1"
};

Endpoint split_endpoint(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw Error(ErrorKind::Parameter, "bad endpoint URL " + url);
    std::string prefix = m[2].matched ? m[2].str() : "";
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {m[1].str(), prefix};
}

std::optional<std::string> read_cache(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return std::nullopt;
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        const auto j = json::parse(bytes);
        return j.at("content").get<std::string>();
    } catch (const json::exception&) {
        return std::nullopt;  // torn or foreign file: refetch
    }
}

void write_cache(const std::filesystem::path& file, const json& record) {
    // Unique temp name per thread so concurrent writers never share one.
    auto tmp = file;
    tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write cache file " + tmp.string());
        out << record.dump() << '\n';
    }
    std::filesystem::rename(tmp, file);
}

struct Task {
    const Example* example;
    const PromptTemplate* tmpl;
    int sample_index;
};

struct Outcome {
    std::optional<Trace> trace;
    std::optional<HarvestFailure> failure;
    std::size_t requests = 0;
    bool cache_hit = false;
};

class Worker {
public:
    Worker(const HarvestJob& job, const Endpoint& endpoint, const std::string& api_key, RateLimiter& limiter)
        : job_(job), endpoint_(endpoint), limiter_(limiter), client_(endpoint.base) {
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(job.request_timeout).count();
        client_.set_connection_timeout(secs, 0);
        client_.set_read_timeout(secs, 0);
        client_.set_write_timeout(secs, 0);
        client_.set_bearer_token_auth(api_key);
    }

    Outcome run(const Task& task) {
        Outcome out;
        const auto& teacher = job_.teacher;
        HarvestFailure failure{task.example->id, teacher.teacher_id, task.tmpl->template_id, task.sample_index, 0, ""};
        const auto prompt = render_prompt(*task.tmpl, *task.example);
        const auto key = cache_key(teacher.model_name, *task.tmpl, prompt, task.sample_index);
        const auto cache_file = job_.cache_dir / (key + ".json");

        std::optional<std::string> content = read_cache(cache_file);
        out.cache_hit = content.has_value();
        if (!content) {
            content = fetch(prompt, failure, out.requests);
            if (!content) {
                out.failure = std::move(failure);
                return out;
            }
            json record;
            record["model"] = teacher.model_name;
            record["template_id"] = task.tmpl->template_id;
            record["sample_index"] = task.sample_index;
            record["example_id"] = task.example->id;
            record["content"] = *content;
            write_cache(cache_file, record);
        }
        try {
            out.trace = make_trace(task.example->id, teacher.teacher_id, *content, job_.rules);
        } catch (const Error& e) {
            failure.reason = std::string("segmentation: ") + e.what();
            out.failure = std::move(failure);
        }
        return out;
    }

private:
    std::optional<std::string> fetch(const RenderedPrompt& prompt, HarvestFailure& failure, std::size_t& requests) {
        json body;
        body["model"] = job_.teacher.model_name;
        json messages = json::array();
        if (!prompt.system_text.empty()) messages.push_back({{"role", "system"}, {"content", prompt.system_text}});
        messages.push_back({{"role", "user"}, {"content", prompt.user_text}});
        body["messages"] = std::move(messages);
        body["temperature"] = job_.teacher.temperature;
        const auto payload = body.dump();
        const auto path = endpoint_.path_prefix + "/chat/completions";

        for (int attempt = 0; attempt <= job_.max_retries; ++attempt) {
            if (attempt > 0) std::this_thread::sleep_for(job_.backoff_base * (1LL << std::min(attempt - 1, 20)));
            limiter_.acquire();
            ++requests;
            failure.attempts = attempt + 1;
            auto res = client_.Post(path, payload, "application/json");
            if (!res) {
                failure.reason = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                failure.reason = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200) {
                failure.reason = "HTTP " + std::to_string(res->status);
                return std::nullopt;
            }
            try {
                const auto j = json::parse(res->body);
                return j.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const json::exception& e) {
                failure.reason = std::string("malformed response: ") + e.what();
                return std::nullopt;
            }
        }
        return std::nullopt;
    }

    const HarvestJob& job_;
    const Endpoint& endpoint_;
    RateLimiter& limiter_;
    httplib::Client client_;
};

}  // namespace

HarvestResult harvest(const HarvestJob& job) {
    const char* key = std::getenv(job.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw Error(ErrorKind::Startup, "API key variable " + job.api_key_env + " is not set");
    const auto examples = read_corpus(job.corpus_path);
    return harvest(job, examples);
}

HarvestResult harvest(const HarvestJob& job, std::span<const Example> examples) {
    const char* key_env = std::getenv(job.api_key_env.c_str());
    if (key_env == nullptr || *key_env == '\0')
        throw Error(ErrorKind::Startup, "API key variable " + job.api_key_env + " is not set");
    job.validate();
    const std::string api_key = key_env;
    const auto endpoint = split_endpoint(job.teacher.endpoint_url);
    std::filesystem::create_directories(job.cache_dir);

    std::vector<Task> tasks;
    for (const auto& e : examples) {
        for (const auto& t : job.templates) {
            for (int s = 0; s < job.teacher.samples_per_example; ++s) tasks.push_back({&e, &t, s});
        }
    }

    RateLimiter limiter(job.rate_limit);
    std::vector<Outcome> outcomes(tasks.size());
    std::atomic<std::size_t> next{0};
    const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(job.concurrency), std::max<std::size_t>(tasks.size(), 1));
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) {
            pool.emplace_back([&] {
                Worker worker(job, endpoint, api_key, limiter);
                for (auto i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
                    try {
                        outcomes[i] = worker.run(tasks[i]);
                    } catch (const std::exception& e) {
                        const auto& t = tasks[i];
                        outcomes[i].failure = HarvestFailure{t.example->id, job.teacher.teacher_id,
                                                             t.tmpl->template_id, t.sample_index, 0, e.what()};
                    }
                }
            });
        }
    }

    HarvestResult result;
    result.request_times = limiter.grants();
    for (auto& o : outcomes) {
        result.requests += o.requests;
        if (o.cache_hit) ++result.cache_hits;
        if (o.trace) result.traces.push_back(std::move(*o.trace));
        if (o.failure) result.failures.push_back(std::move(*o.failure));
    }
    return result;
}

}  // namespace dot
