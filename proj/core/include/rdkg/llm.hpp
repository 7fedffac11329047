#pragma once

#include "rdkg/embeddings.hpp"
#include "rdkg/knowledge_graph.hpp"
#include "rdkg/lecture_space.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rdkg::llm {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct LlmClientConfig {
    std::string base_url;  // full chat-completions endpoint
    std::string model;
    double timeout_seconds = 60.0;
    int retries = 2;
    double temperature = 0.0;
    std::string api_key_env = "RDKG_LLM_API_KEY";
    int backoff_ms = 200;
    /// When set, every prompt and reply is appended to llm_prompts.jsonl here.
    std::filesystem::path debug_dir;

    void validate() const;
};

class LlmClient {
public:
    virtual ~LlmClient() = default;
    /// Reply text, or nullopt when the backend could not be reached.
    virtual std::optional<std::string> complete(const std::vector<ChatMessage>& messages) = 0;
};

/// Chat-completion POST { model, temperature, messages } reading
/// choices[0].message.content. Replies are cached by prompt hash.
class HttpLlmClient final : public LlmClient {
public:
    explicit HttpLlmClient(LlmClientConfig config);

    std::optional<std::string> complete(const std::vector<ChatMessage>& messages) override;

private:
    void debug_log(const std::string& key, const nlohmann::json& body, const std::optional<std::string>& reply,
                   const std::string& error);

    LlmClientConfig config_;
    std::mutex mutex_;
    std::map<std::string, std::string> cache_;
};

/// The first balanced {...} object in a reply (code fences and prose around
/// it are ignored), parsed. nullopt when none parses.
std::optional<nlohmann::json> extract_json_object(std::string_view reply);

namespace prompts {
extern const char* const kBootstrapSystem;
extern const char* const kNamingSystem;
extern const char* const kEdgeSystem;

std::string bootstrap_user(std::string_view markdown, const kg::RelationOntology& ontology);
std::string naming_user(const std::vector<std::string>& texts);
/// Only labels, definitions and existing relations go into the prompt.
std::string edge_user(const kg::KnowledgeGraph& graph, const kg::RelationOntology& ontology,
                      const std::string& focus_id);
}  // namespace prompts

/// Checks one proposed edge object { src, dst, relation, confidence, rationale }
/// against the graph. Returns the edge or the reason it was rejected.
std::variant<kg::RelationEdge, std::string> validate_proposal(const nlohmann::json& proposal,
                                                              const kg::KnowledgeGraph& graph,
                                                              const kg::RelationOntology& ontology);

/// Heading-derived graph: one node per heading, definition = first block
/// under it, partOf edges from child to parent heading, confidence 0.5.
kg::KnowledgeGraph fallback_bootstrap(const lecture::Section& root);

/// LLM bootstrap with validation, falling back to fallback_bootstrap when the
/// client is absent or yields no valid node. Throws InputError("empty input").
kg::KnowledgeGraph bootstrap_kg(std::string_view markdown, LlmClient* client,
                                const kg::RelationOntology& ontology = {});

/// Labels concept groups. Asks the client first when one is configured; an
/// empty or failed reply falls back to TF-IDF over the lecture's units.
class ConceptNamer {
public:
    explicit ConceptNamer(const std::vector<std::string>& corpus, LlmClient* client = nullptr);

    std::string name(const std::vector<std::string>& texts) const;
    std::string tfidf_label(const std::vector<std::string>& texts) const;

private:
    std::size_t n_units_ = 0;
    std::map<std::string, std::size_t> df_;
    LlmClient* client_;
};

/// Edges for a freshly added node. Validated client proposals touching the
/// node when available; otherwise one relatedTo (confidence 0.3) to the node
/// with the highest cosine similarity. Empty when the graph has no other node.
std::vector<kg::RelationEdge> propose_label_edges(const kg::KnowledgeGraph& graph, const std::string& new_id,
                                                  const embed::EmbeddingProvider& provider, LlmClient* client,
                                                  const kg::RelationOntology& ontology = {});

/// Client-proposed edges among existing nodes, validated one by one.
std::vector<kg::RelationEdge> propose_graph_edges(const kg::KnowledgeGraph& graph, LlmClient* client,
                                                  const kg::RelationOntology& ontology = {});

}  // namespace rdkg::llm
