#include <chrono>
#include <cmath>
#include <string>
#include <thread>

#include "apex/decision.hpp"
#include "apex/error.hpp"
#include "apex/vec.hpp"

// after Eigen: httplib drags in <resolv.h>, whose _res macro mangles
// Eigen's internal parameter names if it lands first
#include <httplib.h>

namespace apex {

namespace {

struct Endpoint {
    std::string host;  // scheme://host[:port]
    std::string path;  // request path, always ends in /chat/completions
};

Endpoint resolve_endpoint(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("base_url must include a scheme, got \"" + base_url + "\"");
    }
    const auto path_start = base_url.find('/', scheme_end + 3);
    Endpoint ep;
    if (path_start == std::string::npos) {
        ep.host = base_url;
        ep.path = "/chat/completions";
    } else {
        ep.host = base_url.substr(0, path_start);
        std::string prefix = base_url.substr(path_start);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
        ep.path = prefix + "/chat/completions";
    }
    return ep;
}

bool retryable_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

std::string extract_content(const std::string& body) {
    Json doc;
    try {
        doc = Json::parse(body);
    } catch (const Json::parse_error& e) {
        throw BackendError(std::string("malformed completion response: ") + e.what());
    }
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
        throw BackendError("completion response has no choices");
    }
    const auto& first = doc["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content") ||
        !first["message"]["content"].is_string()) {
        throw BackendError("completion response lacks message content");
    }
    return first["message"]["content"].get<std::string>();
}

}  // namespace

ChatReply chat_completion(const PromptBundle& prompt, const BackendConfig& config,
                          const std::string& api_key) {
    if (config.retries < 0) throw ConfigError("retries must be >= 0");
    if (!(config.timeout_s > 0.0)) throw ConfigError("timeout_s must be positive");
    const Endpoint ep = resolve_endpoint(config.base_url);

    const Json payload = {
        {"model", config.model},
        {"temperature", 0},
        {"messages",
         Json::array({Json{{"role", "system"}, {"content", prompt.system}},
                      Json{{"role", "user"}, {"content", prompt.user}}})},
    };
    const std::string body = payload.dump();
    const httplib::Headers headers = {{"Authorization", "Bearer " + api_key}};

    const auto started = std::chrono::steady_clock::now();
    std::string last_error = "no attempt made";
    const int attempts = config.retries + 1;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            const double seconds = config.backoff_s * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
        }
        httplib::Client client(ep.host);
        const auto whole = static_cast<time_t>(config.timeout_s);
        const auto micros = static_cast<long>((config.timeout_s - static_cast<double>(whole)) * 1e6);
        client.set_connection_timeout(whole, micros);
        client.set_read_timeout(whole, micros);
        client.set_write_timeout(whole, micros);

        auto res = client.Post(ep.path, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            ChatReply reply;
            reply.content = extract_content(res->body);
            reply.latency_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            return reply;
        }
        last_error = "HTTP " + std::to_string(res->status);
        if (!retryable_status(res->status)) {
            throw BackendError("chat completion rejected: " + last_error);
        }
    }
    throw BackendError("chat completion failed after " + std::to_string(attempts) +
                       " attempts; last error: " + last_error);
}

}  // namespace apex
