#include "dot/mock_endpoint.hpp"

#include <atomic>
#include <mutex>
#include <regex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dot/error.hpp"
#include "dot/rng.hpp"

namespace dot {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr const char* kWords[] = {"compute", "the",   "value", "of",    "each", "term",  "then", "combine",
                                  "partial", "sums",  "check", "that",  "result", "holds", "for", "given",
                                  "numbers", "apply", "rule",  "carry", "into", "next",  "line", "simplify"};

}  // namespace

std::string MockEndpoint::reply_for(const std::string& user_text, int words_per_step, int padding_jitter) {
    static const std::regex depth_re(R"(\[depth=(\d+)\])");
    std::smatch m;
    const auto h = fnv1a(user_text);
    int depth = 1 + static_cast<int>(h % 8);
    if (std::regex_search(user_text, m, depth_re)) depth = std::max(1, std::stoi(m[1].str()));
    Rng rng(h);
    std::string out;
    for (int s = 1; s <= depth; ++s) {
        out += std::to_string(s) + ".";
        const int extra = padding_jitter > 0 ? static_cast<int>(rng.below(static_cast<std::uint64_t>(padding_jitter) + 1)) : 0;
        for (int w = 0; w < std::max(1, words_per_step) + extra; ++w) {
            out += " ";
            out += kWords[rng.below(std::size(kWords))];
        }
        out += s == depth ? " so the answer follows.\n" : ".\n";
    }
    return out;
}

struct MockEndpoint::Impl {
    MockEndpointOptions options;
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::string host;

    mutable std::mutex mutex;
    Rng rng{1};
    std::vector<std::chrono::steady_clock::time_point> arrivals;
    std::size_t injected = 0;
};

MockEndpoint::MockEndpoint(MockEndpointOptions options, std::string host, int port) : impl_(std::make_unique<Impl>()) {
    impl_->options = options;
    impl_->rng = Rng(options.seed);
    impl_->host = host;
    auto* impl = impl_.get();

    impl_->server.Post(R"(/v1/chat/completions)", [impl](const httplib::Request& req, httplib::Response& res) {
        bool fail = false;
        {
            std::lock_guard lock(impl->mutex);
            impl->arrivals.push_back(std::chrono::steady_clock::now());
            if (impl->options.always_status != 0) {
                fail = true;
            } else if (impl->options.failure_rate > 0.0 && impl->rng.uniform() < impl->options.failure_rate) {
                fail = true;
            }
            if (fail) ++impl->injected;
        }
        if (fail) {
            res.status = impl->options.always_status != 0 ? impl->options.always_status : 500;
            res.set_content(R"({"error":{"message":"injected failure"}})", "application/json");
            return;
        }
        if (impl->options.malformed) {
            res.set_content(R"({"unexpected":true})", "application/json");
            return;
        }
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception&) {
            res.status = 400;
            return;
        }
        std::string user;
        for (const auto& msg : body.value("messages", nlohmann::json::array())) {
            if (msg.value("role", "") == "user") user = msg.value("content", "");
        }
        nlohmann::json reply;
        reply["id"] = "mock-" + std::to_string(fnv1a(user));
        reply["object"] = "chat.completion";
        reply["model"] = body.value("model", "mock");
        reply["choices"] = nlohmann::json::array(
            {{{"index", 0},
              {"message", {{"role", "assistant"}, {"content", reply_for(user, impl->options.words_per_step, impl->options.padding_jitter)}}},
              {"finish_reason", "stop"}}});
        res.set_content(reply.dump(), "application/json");
    });

    impl_->port = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (impl_->port <= 0) throw Error(ErrorKind::Io, "mock endpoint cannot bind " + host);
    impl_->thread = std::thread([impl] { impl->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

MockEndpoint::~MockEndpoint() { stop(); }

void MockEndpoint::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

void MockEndpoint::wait() {
    while (impl_->server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

int MockEndpoint::port() const { return impl_->port; }

std::string MockEndpoint::url() const { return "http://" + impl_->host + ":" + std::to_string(impl_->port) + "/v1"; }

std::size_t MockEndpoint::request_count() const {
    std::lock_guard lock(impl_->mutex);
    return impl_->arrivals.size();
}

std::size_t MockEndpoint::failures_injected() const {
    std::lock_guard lock(impl_->mutex);
    return impl_->injected;
}

std::vector<std::chrono::steady_clock::time_point> MockEndpoint::arrivals() const {
    std::lock_guard lock(impl_->mutex);
    return impl_->arrivals;
}

}  // namespace dot
