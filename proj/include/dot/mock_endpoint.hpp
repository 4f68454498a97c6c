#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace dot {

struct MockEndpointOptions {
    /// Probability that a request is answered with HTTP 500.
    double failure_rate = 0.0;
    std::uint64_t seed = 1;
    /// Nonzero: answer every request with this status.
    int always_status = 0;
    /// Answer 200 with a body that is not a chat completion.
    bool malformed = false;
    /// Filler words per step; a second teacher with a larger value is the
    /// same reasoner written more verbosely.
    int words_per_step = 6;
    /// Up to this many extra filler words per step, drawn from the message
    /// hash. Breaks the tok ordering without touching step structure.
    int padding_jitter = 0;
};

/// In-process OpenAI-compatible chat endpoint for offline tests and demos.
///
/// The reply to a prompt is a numbered list whose length is read from a
/// "[depth=N]" tag in the user message, or derived from a hash of the
/// message when absent. Replies depend only on the request body, except
/// for injected failures.
class MockEndpoint {
public:
    explicit MockEndpoint(MockEndpointOptions options = {}, std::string host = "127.0.0.1", int port = 0);
    ~MockEndpoint();
    MockEndpoint(const MockEndpoint&) = delete;
    MockEndpoint& operator=(const MockEndpoint&) = delete;

    int port() const;
    /// Base URL including the /v1 prefix.
    std::string url() const;

    std::size_t request_count() const;
    std::size_t failures_injected() const;
    /// Arrival times of every chat request, in arrival order.
    std::vector<std::chrono::steady_clock::time_point> arrivals() const;

    /// Blocks until stop() is called from another thread.
    void wait();
    void stop();

    /// Reply text the endpoint produces for a user message.
    static std::string reply_for(const std::string& user_text, int words_per_step, int padding_jitter = 0);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace dot
