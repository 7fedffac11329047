#include "http_util.hpp"

#include "rdkg/errors.hpp"
#include "rdkg/llm.hpp"
#include "rdkg/log.hpp"
#include "rdkg/text.hpp"

#include <fstream>

namespace rdkg::llm {

void LlmClientConfig::validate() const {
    if (base_url.empty()) throw InputError("llm client requires a base url");
    if (!(timeout_seconds > 0.0)) throw InputError("llm timeout must be positive");
    if (retries < 0) throw InputError("llm retries must be >= 0");
    if (!(temperature >= 0.0)) throw InputError("llm temperature must be >= 0");
}

HttpLlmClient::HttpLlmClient(LlmClientConfig config) : config_(std::move(config)) { config_.validate(); }

std::optional<std::string> HttpLlmClient::complete(const std::vector<ChatMessage>& messages) {
    nlohmann::json body;
    body["model"] = config_.model;
    body["temperature"] = config_.temperature;
    body["messages"] = nlohmann::json::array();
    for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    const std::string key = text::sha256_hex(body.dump());

    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }

    detail::HttpPostOptions opts;
    opts.timeout_seconds = config_.timeout_seconds;
    opts.retries = config_.retries;
    opts.backoff_ms = config_.backoff_ms;
    opts.bearer_token = detail::env_or_empty(config_.api_key_env);

    std::string err;
    std::optional<std::string> content;
    const auto reply = detail::post_json(detail::split_url(config_.base_url), body, opts, err);
    if (reply) {
        try {
            content = reply->at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            err = "reply lacks choices[0].message.content";
        }
    }
    debug_log(key, body, content, err);
    if (!content) {
        log::warn("llm unavailable: " + err);
        return std::nullopt;
    }
    std::lock_guard lock(mutex_);
    cache_.emplace(key, *content);
    return content;
}

void HttpLlmClient::debug_log(const std::string& key, const nlohmann::json& body,
                              const std::optional<std::string>& reply, const std::string& error) {
    if (config_.debug_dir.empty()) return;
    std::lock_guard lock(mutex_);
    std::filesystem::create_directories(config_.debug_dir);
    std::ofstream out(config_.debug_dir / "llm_prompts.jsonl", std::ios::app);
    nlohmann::json rec;
    rec["prompt_hash"] = key;
    rec["request"] = body;
    rec["reply"] = reply ? nlohmann::json(*reply) : nlohmann::json(nullptr);
    if (!error.empty()) rec["error"] = error;
    out << rec.dump() << '\n';
}

std::optional<nlohmann::json> extract_json_object(std::string_view reply) {
    for (std::size_t start = reply.find('{'); start != std::string_view::npos; start = reply.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t k = start; k < reply.size(); ++k) {
            const char c = reply[k];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}' && --depth == 0) {
                auto parsed = nlohmann::json::parse(reply.substr(start, k - start + 1), nullptr, false);
                if (!parsed.is_discarded() && parsed.is_object()) return parsed;
                break;
            }
        }
    }
    return std::nullopt;
}

std::variant<kg::RelationEdge, std::string> validate_proposal(const nlohmann::json& proposal,
                                                              const kg::KnowledgeGraph& graph,
                                                              const kg::RelationOntology& ontology) {
    if (!proposal.is_object()) return std::string("proposal is not an object");
    auto str = [&](const char* key) -> std::string {
        const auto it = proposal.find(key);
        return it != proposal.end() && it->is_string() ? it->get<std::string>() : std::string();
    };
    kg::RelationEdge e;
    e.src = str("src");
    e.dst = str("dst");
    e.relation = str("relation");
    const std::string rationale = text::trim(str("rationale"));
    if (!graph.find(e.src)) return "unknown node '" + e.src + "'";
    if (!graph.find(e.dst)) return "unknown node '" + e.dst + "'";
    if (e.src == e.dst) return "self-loop on '" + e.src + "'";
    if (!ontology.allows(e.relation)) return "relation '" + e.relation + "' not allowed";
    if (graph.has_edge(e.src, e.dst, e.relation)) return "duplicate edge " + e.src + " " + e.relation + " " + e.dst;
    const auto conf = proposal.find("confidence");
    if (conf == proposal.end() || !conf->is_number()) return std::string("missing confidence");
    e.confidence = conf->get<double>();
    if (!(e.confidence >= 0.0 && e.confidence <= 1.0)) return std::string("confidence outside [0, 1]");
    if (rationale.empty()) return std::string("empty rationale");
    e.rationale = rationale;
    return e;
}

namespace {

std::vector<kg::RelationEdge> collect_edges(const std::optional<std::string>& reply, const kg::KnowledgeGraph& graph,
                                            const kg::RelationOntology& ontology, const std::string& focus_id) {
    std::vector<kg::RelationEdge> out;
    if (!reply) return out;
    const auto doc = extract_json_object(*reply);
    if (!doc || !doc->contains("edges") || !(*doc)["edges"].is_array()) {
        log::warn("llm edge reply has no edges array");
        return out;
    }
    kg::KnowledgeGraph scratch = graph;
    for (const auto& p : (*doc)["edges"]) {
        auto checked = validate_proposal(p, scratch, ontology);
        if (auto* reason = std::get_if<std::string>(&checked)) {
            log::warn("dropped edge proposal: " + *reason);
            continue;
        }
        auto& e = std::get<kg::RelationEdge>(checked);
        if (!focus_id.empty() && e.src != focus_id && e.dst != focus_id) {
            log::warn("dropped edge proposal: does not touch " + focus_id);
            continue;
        }
        scratch.add_edge(e);
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace

std::vector<kg::RelationEdge> propose_label_edges(const kg::KnowledgeGraph& graph, const std::string& new_id,
                                                  const embed::EmbeddingProvider& provider, LlmClient* client,
                                                  const kg::RelationOntology& ontology) {
    const auto self = graph.index_of(new_id);
    if (!self) throw InputError("propose_label_edges: unknown node " + new_id);
    if (graph.nodes.size() < 2) return {};

    if (client != nullptr) {
        const auto reply = client->complete({{"system", prompts::kEdgeSystem},
                                             {"user", prompts::edge_user(graph, ontology, new_id)}});
        auto edges = collect_edges(reply, graph, ontology, new_id);
        if (!edges.empty()) return edges;
    }

    const auto texts = kg::node_texts(graph);
    const auto emb = provider.embed(texts);
    std::optional<std::size_t> best;
    double best_sim = 0.0;
    for (std::size_t k = 0; k < graph.nodes.size(); ++k) {
        if (k == *self) continue;
        const double sim = embed::cosine_similarity(emb.row(static_cast<Eigen::Index>(*self)),
                                                    emb.row(static_cast<Eigen::Index>(k)));
        if (!best || sim > best_sim) {
            best = k;
            best_sim = sim;
        }
    }
    kg::RelationEdge e;
    e.src = new_id;
    e.dst = graph.nodes[*best].id;
    e.relation = kg::kRelatedTo;
    e.confidence = 0.3;
    e.rationale = "nearest existing concept by embedding similarity (" + text::format_sig9(best_sim) + ")";
    return {e};
}

std::vector<kg::RelationEdge> propose_graph_edges(const kg::KnowledgeGraph& graph, LlmClient* client,
                                                  const kg::RelationOntology& ontology) {
    if (client == nullptr || graph.nodes.size() < 2) return {};
    const auto reply =
        client->complete({{"system", prompts::kEdgeSystem}, {"user", prompts::edge_user(graph, ontology, "")}});
    return collect_edges(reply, graph, ontology, "");
}

}  // namespace rdkg::llm
