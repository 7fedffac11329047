#pragma once

#include "rdkg/embeddings.hpp"
#include "rdkg/matrix.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace rdkg::kg {

using ordered_json = nlohmann::ordered_json;

struct Provenance {
    std::vector<std::string> section_path;
    std::optional<std::pair<int, int>> line_span;
    std::string excerpt;
    std::optional<std::string> origin;  // "fallback" for heading-derived elements
    ordered_json extra = ordered_json::object();

    bool operator==(const Provenance&) const = default;
};

struct ConceptNode {
    std::string id;
    std::string label;
    std::string definition;
    std::vector<std::string> aliases;
    std::optional<Provenance> provenance;
    double confidence = 1.0;
    std::optional<std::string> rationale;
    ordered_json extra = ordered_json::object();  // unknown fields, preserved verbatim

    bool operator==(const ConceptNode&) const = default;
};

struct RelationEdge {
    std::string src;
    std::string dst;
    std::string relation;
    double confidence = 1.0;
    std::optional<Provenance> provenance;
    std::optional<std::string> rationale;
    ordered_json extra = ordered_json::object();

    bool operator==(const RelationEdge&) const = default;

    /// Same unordered endpoint pair.
    bool connects(const std::string& a, const std::string& b) const {
        return (src == a && dst == b) || (src == b && dst == a);
    }
};

inline constexpr const char* kRelatedTo = "relatedTo";

/// Undirected concept graph. A value type: edits return or mutate copies.
struct KnowledgeGraph {
    std::vector<ConceptNode> nodes;
    std::vector<RelationEdge> edges;
    ordered_json extra = ordered_json::object();

    bool operator==(const KnowledgeGraph&) const = default;

    std::optional<std::size_t> index_of(const std::string& id) const;
    const ConceptNode* find(const std::string& id) const;
    ConceptNode* find(const std::string& id);

    bool connected(const std::string& a, const std::string& b) const;
    bool has_edge(const std::string& a, const std::string& b, const std::string& relation) const;

    /// Adds unless it is a self-loop or duplicates an existing
    /// (unordered pair, relation). Returns whether the edge was added.
    bool add_edge(RelationEdge edge);

    /// Removes the node and every incident edge.
    void remove_node(const std::string& id);

    /// Smallest "<prefix><k>" (k = 1, 2, ...) not already used as a node id.
    std::string fresh_id(const std::string& prefix) const;

    std::vector<std::size_t> degrees() const;
};

/// The allowed relation names, plus any configured extras.
class RelationOntology {
public:
    RelationOntology();
    explicit RelationOntology(const std::vector<std::string>& extra_relations);

    bool allows(const std::string& relation) const { return allowed_.contains(relation); }
    const std::set<std::string>& relations() const { return allowed_; }

private:
    std::set<std::string> allowed_;
};

const std::vector<std::string>& builtin_relations();

struct Violation {
    enum class Kind { DanglingEndpoint, UnknownRelation, DuplicateId, SelfLoop, DuplicateEdge, EmptyLabel, BadConfidence };
    Kind kind;
    std::string message;
};

std::string to_string(Violation::Kind kind);

/// Empty result means the graph is valid.
std::vector<Violation> validate_graph(const KnowledgeGraph& graph, const RelationOntology& ontology = {});

/// |V| + 0.5 |E|
double rate(const KnowledgeGraph& graph);

/// "label. definition. alias1; alias2; alias3", skipping empty parts and
/// using at most three aliases.
std::string node_text(const ConceptNode& node);
std::vector<std::string> node_texts(const KnowledgeGraph& graph);

/// Unweighted, undirected hop counts. Unreachable pairs get (largest finite
/// hop count + 1).
Matrix hop_distance(const KnowledgeGraph& graph);

/// hop_distance divided by its maximum; the zero matrix when the maximum is 0.
Matrix struct_distance(const KnowledgeGraph& graph);

struct KgWeights {
    double structure = 0.4;
    double sem = 0.6;
};

/// gamma_struct * D_struct + gamma_sem * D_sem, then off-diagonal min-max
/// normalization with a zero diagonal. Throws InputError on invalid weights.
Matrix combine_kg_distance(const Matrix& structure, const Matrix& sem, const KgWeights& gamma);

enum class NodeMeasure { Uniform, Degree };

/// Reproduction metric-measure space over the graph's nodes.
struct KgSpace {
    KnowledgeGraph graph;
    Matrix d;
    Vector mu;
    KgWeights gamma;
    Matrix structure;
    Matrix sem;  // normalized
};

/// node_embeddings rows follow graph.nodes order.
KgSpace build_kg_space(KnowledgeGraph graph, const embed::EmbeddingMatrix& node_embeddings,
                       const KgWeights& gamma = {}, NodeMeasure measure = NodeMeasure::Uniform);

ordered_json to_json(const KnowledgeGraph& graph);
/// Structural parse only; run validate_graph for semantic checks.
KnowledgeGraph kg_from_json(const ordered_json& doc);
std::string dump_kg(const KnowledgeGraph& graph);
KnowledgeGraph load_kg(const std::filesystem::path& path);
void save_kg(const std::filesystem::path& path, const KnowledgeGraph& graph);

}  // namespace rdkg::kg
