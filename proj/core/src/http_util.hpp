#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace rdkg::detail {

struct HttpTarget {
    std::string origin;  // scheme://host[:port]
    std::string path;    // always starts with '/'
};

HttpTarget split_url(const std::string& url);

struct HttpPostOptions {
    double timeout_seconds = 30.0;
    int retries = 0;
    int backoff_ms = 200;
    std::string bearer_token;
};

/// POST a JSON body, retrying transport failures and non-2xx replies with
/// exponential backoff. Returns the parsed reply body, or nullopt once all
/// attempts are exhausted. last_error receives a short description.
std::optional<nlohmann::json> post_json(const HttpTarget& target, const nlohmann::json& body,
                                        const HttpPostOptions& options, std::string& last_error);

/// Value of an environment variable, or empty when unset.
std::string env_or_empty(const std::string& name);

}  // namespace rdkg::detail
