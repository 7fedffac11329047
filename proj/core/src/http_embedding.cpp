#include "http_util.hpp"

#include "rdkg/embeddings.hpp"
#include "rdkg/errors.hpp"
#include "rdkg/text.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <thread>

namespace rdkg::detail {

HttpTarget split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw InputError("url must include a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::optional<nlohmann::json> post_json(const HttpTarget& target, const nlohmann::json& body,
                                        const HttpPostOptions& options, std::string& last_error) {
    httplib::Client client(target.origin);
    const auto timeout = std::chrono::milliseconds(static_cast<long>(options.timeout_seconds * 1000.0));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    if (!options.bearer_token.empty()) headers.emplace("Authorization", "Bearer " + options.bearer_token);

    const std::string payload = body.dump();
    int delay_ms = options.backoff_ms;
    for (int attempt = 0; attempt <= options.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
            delay_ms *= 2;
        }
        auto res = client.Post(target.path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_error = "http status " + std::to_string(res->status);
            continue;
        }
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("malformed reply: ") + e.what();
        }
    }
    return std::nullopt;
}

std::string env_or_empty(const std::string& name) {
    if (name.empty()) return {};
    const char* v = std::getenv(name.c_str());
    return v != nullptr ? std::string(v) : std::string();
}

}  // namespace rdkg::detail

namespace rdkg::embed {

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbeddingConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw InputError("http embedding provider requires a base url");
    if (!(config_.timeout_seconds > 0.0)) throw InputError("http embedding timeout must be positive");
    if (config_.batch_size == 0) config_.batch_size = 1;
}

std::vector<std::vector<double>> HttpEmbeddingProvider::fetch(std::span<const std::string> batch) const {
    nlohmann::json body;
    body["model"] = config_.model;
    body["inputs"] = std::vector<std::string>(batch.begin(), batch.end());

    detail::HttpPostOptions opts;
    opts.timeout_seconds = config_.timeout_seconds;
    opts.retries = config_.retries;
    opts.backoff_ms = config_.backoff_ms;
    opts.bearer_token = detail::env_or_empty(config_.api_key_env);

    std::string err;
    const auto reply = detail::post_json(detail::split_url(config_.base_url), body, opts, err);
    if (!reply) throw ProviderError("embedding provider unavailable: " + err);
    if (!reply->contains("embeddings") || !(*reply)["embeddings"].is_array() ||
        (*reply)["embeddings"].size() != batch.size()) {
        throw ProviderError("embedding provider unavailable: reply lacks one embedding per input");
    }
    return (*reply)["embeddings"].get<std::vector<std::vector<double>>>();
}

EmbeddingMatrix HttpEmbeddingProvider::embed(std::span<const std::string> texts) const {
    if (texts.empty()) throw InputError("embed: empty text batch");
    std::vector<std::string> keys;
    keys.reserve(texts.size());
    std::vector<std::string> pending;
    std::vector<std::string> pending_keys;
    {
        std::lock_guard lock(cache_mutex_);
        for (const auto& t : texts) {
            if (t.empty()) throw InputError("embed: empty text in batch");
            keys.push_back(text::sha256_hex(t));
            if (!cache_.contains(keys.back()) &&
                std::find(pending_keys.begin(), pending_keys.end(), keys.back()) == pending_keys.end()) {
                pending.push_back(t);
                pending_keys.push_back(keys.back());
            }
        }
    }
    for (std::size_t start = 0; start < pending.size(); start += config_.batch_size) {
        const std::size_t n = std::min(config_.batch_size, pending.size() - start);
        auto vectors = fetch(std::span<const std::string>(pending).subspan(start, n));
        std::lock_guard lock(cache_mutex_);
        for (std::size_t k = 0; k < n; ++k) cache_.emplace(pending_keys[start + k], std::move(vectors[k]));
    }

    std::lock_guard lock(cache_mutex_);
    const std::size_t dim = cache_.at(keys[0]).size();
    EmbeddingMatrix::Storage out(static_cast<Eigen::Index>(keys.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < keys.size(); ++r) {
        const auto& v = cache_.at(keys[r]);
        if (v.size() != dim) throw ProviderError("embedding provider returned inconsistent dimensions");
        for (std::size_t k = 0; k < dim; ++k) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = v[k];
    }
    return EmbeddingMatrix(std::move(out));
}

std::string HttpEmbeddingProvider::describe() const {
    return "http(" + config_.base_url + ",model=" + config_.model + ")";
}

}  // namespace rdkg::embed
