#include "rdkg/knowledge_graph.hpp"

#include "rdkg/errors.hpp"
#include "rdkg/text.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <map>

namespace rdkg::kg {

std::optional<std::size_t> KnowledgeGraph::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id == id) return i;
    }
    return std::nullopt;
}

const ConceptNode* KnowledgeGraph::find(const std::string& id) const {
    const auto i = index_of(id);
    return i ? &nodes[*i] : nullptr;
}

ConceptNode* KnowledgeGraph::find(const std::string& id) {
    const auto i = index_of(id);
    return i ? &nodes[*i] : nullptr;
}

bool KnowledgeGraph::connected(const std::string& a, const std::string& b) const {
    return std::any_of(edges.begin(), edges.end(), [&](const RelationEdge& e) { return e.connects(a, b); });
}

bool KnowledgeGraph::has_edge(const std::string& a, const std::string& b, const std::string& relation) const {
    return std::any_of(edges.begin(), edges.end(),
                       [&](const RelationEdge& e) { return e.relation == relation && e.connects(a, b); });
}

bool KnowledgeGraph::add_edge(RelationEdge edge) {
    if (edge.src == edge.dst || has_edge(edge.src, edge.dst, edge.relation)) return false;
    edges.push_back(std::move(edge));
    return true;
}

void KnowledgeGraph::remove_node(const std::string& id) {
    std::erase_if(nodes, [&](const ConceptNode& n) { return n.id == id; });
    std::erase_if(edges, [&](const RelationEdge& e) { return e.src == id || e.dst == id; });
}

std::string KnowledgeGraph::fresh_id(const std::string& prefix) const {
    for (std::size_t k = 1;; ++k) {
        std::string candidate = prefix + std::to_string(k);
        if (!index_of(candidate)) return candidate;
    }
}

std::vector<std::size_t> KnowledgeGraph::degrees() const {
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < nodes.size(); ++i) pos.emplace(nodes[i].id, i);
    std::vector<std::size_t> deg(nodes.size(), 0);
    for (const auto& e : edges) {
        const auto a = pos.find(e.src);
        const auto b = pos.find(e.dst);
        if (a == pos.end() || b == pos.end() || a->second == b->second) continue;
        ++deg[a->second];
        ++deg[b->second];
    }
    return deg;
}

const std::vector<std::string>& builtin_relations() {
    static const std::vector<std::string> rel = {
        "isA",      "partOf",   "prerequisiteOf", "dependsOn", "uses",       "exampleOf", "contrastsWith",
        "implies",  "provedBy", "produces",       "consumes",  "assessedBy", "relatedTo",
    };
    return rel;
}

RelationOntology::RelationOntology() : allowed_(builtin_relations().begin(), builtin_relations().end()) {}

RelationOntology::RelationOntology(const std::vector<std::string>& extra_relations) : RelationOntology() {
    allowed_.insert(extra_relations.begin(), extra_relations.end());
}

std::string to_string(Violation::Kind kind) {
    switch (kind) {
        case Violation::Kind::DanglingEndpoint: return "dangling endpoint";
        case Violation::Kind::UnknownRelation: return "unknown relation";
        case Violation::Kind::DuplicateId: return "duplicate id";
        case Violation::Kind::SelfLoop: return "self-loop";
        case Violation::Kind::DuplicateEdge: return "duplicate edge";
        case Violation::Kind::EmptyLabel: return "empty label";
        case Violation::Kind::BadConfidence: return "confidence out of range";
    }
    return "unknown";
}

std::vector<Violation> validate_graph(const KnowledgeGraph& graph, const RelationOntology& ontology) {
    std::vector<Violation> out;
    auto report = [&](Violation::Kind k, std::string msg) {
        out.push_back({k, to_string(k) + ": " + std::move(msg)});
    };
    std::set<std::string> ids;
    for (const auto& n : graph.nodes) {
        if (!ids.insert(n.id).second) report(Violation::Kind::DuplicateId, "node " + n.id);
        if (text::trim(n.label).empty()) report(Violation::Kind::EmptyLabel, "node " + n.id);
        if (!(n.confidence >= 0.0 && n.confidence <= 1.0)) report(Violation::Kind::BadConfidence, "node " + n.id);
    }
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    for (const auto& e : graph.edges) {
        const std::string tag = e.src + " -" + e.relation + "- " + e.dst;
        if (!ids.contains(e.src)) report(Violation::Kind::DanglingEndpoint, tag + " (missing " + e.src + ")");
        if (!ids.contains(e.dst)) report(Violation::Kind::DanglingEndpoint, tag + " (missing " + e.dst + ")");
        if (!ontology.allows(e.relation)) report(Violation::Kind::UnknownRelation, tag);
        if (e.src == e.dst) report(Violation::Kind::SelfLoop, tag);
        if (!(e.confidence >= 0.0 && e.confidence <= 1.0)) report(Violation::Kind::BadConfidence, tag);
        const auto key = std::make_tuple(std::min(e.src, e.dst), std::max(e.src, e.dst), e.relation);
        if (!seen.insert(key).second) report(Violation::Kind::DuplicateEdge, tag);
    }
    return out;
}

double rate(const KnowledgeGraph& graph) {
    return static_cast<double>(graph.nodes.size()) + 0.5 * static_cast<double>(graph.edges.size());
}

std::string node_text(const ConceptNode& node) {
    std::vector<std::string> parts;
    if (auto l = text::trim(node.label); !l.empty()) parts.push_back(std::move(l));
    if (auto d = text::trim(node.definition); !d.empty()) parts.push_back(std::move(d));
    std::vector<std::string> aliases;
    for (const auto& a : node.aliases) {
        if (aliases.size() == 3) break;
        if (auto t = text::trim(a); !t.empty()) aliases.push_back(std::move(t));
    }
    if (!aliases.empty()) parts.push_back(text::join(aliases, "; "));
    return text::join(parts, ". ");
}

std::vector<std::string> node_texts(const KnowledgeGraph& graph) {
    std::vector<std::string> out;
    out.reserve(graph.nodes.size());
    for (const auto& n : graph.nodes) out.push_back(node_text(n));
    return out;
}

Matrix hop_distance(const KnowledgeGraph& graph) {
    const std::size_t m = graph.nodes.size();
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < m; ++i) pos.emplace(graph.nodes[i].id, i);
    std::vector<std::vector<std::size_t>> adj(m);
    for (const auto& e : graph.edges) {
        const auto a = pos.find(e.src);
        const auto b = pos.find(e.dst);
        if (a == pos.end() || b == pos.end() || a->second == b->second) continue;
        adj[a->second].push_back(b->second);
        adj[b->second].push_back(a->second);
    }
    constexpr int kUnreached = -1;
    std::vector<std::vector<int>> hops(m, std::vector<int>(m, kUnreached));
    int max_finite = 0;
    for (std::size_t s = 0; s < m; ++s) {
        auto& dist = hops[s];
        dist[s] = 0;
        std::deque<std::size_t> queue{s};
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            for (std::size_t v : adj[u]) {
                if (dist[v] != kUnreached) continue;
                dist[v] = dist[u] + 1;
                max_finite = std::max(max_finite, dist[v]);
                queue.push_back(v);
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(m);
    Matrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const int h = hops[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            out(i, j) = h == kUnreached ? static_cast<double>(max_finite + 1) : static_cast<double>(h);
        }
    }
    return out;
}

Matrix struct_distance(const KnowledgeGraph& graph) {
    Matrix hops = hop_distance(graph);
    if (hops.size() == 0) return hops;
    const double mx = hops.maxCoeff();
    if (mx <= 0.0) return Matrix::Zero(hops.rows(), hops.cols());
    return hops / mx;
}

Matrix combine_kg_distance(const Matrix& structure, const Matrix& sem, const KgWeights& gamma) {
    const std::array<Matrix, 2> parts{structure, sem};
    const std::array<double, 2> w{gamma.structure, gamma.sem};
    return normalize_offdiag(fuse(parts, w));
}

KgSpace build_kg_space(KnowledgeGraph graph, const embed::EmbeddingMatrix& node_embeddings, const KgWeights& gamma,
                       NodeMeasure measure) {
    const std::size_t m = graph.nodes.size();
    if (m == 0) throw InputError("knowledge graph has no nodes");
    if (node_embeddings.rows() != static_cast<Eigen::Index>(m)) {
        throw InputError("node embeddings must have one row per node");
    }
    KgSpace s;
    s.gamma = gamma;
    s.structure = struct_distance(graph);
    s.sem = normalize_offdiag(embed::pairwise_cosine_distance(node_embeddings));
    s.d = combine_kg_distance(s.structure, s.sem, gamma);
    if (measure == NodeMeasure::Degree) {
        const auto deg = graph.degrees();
        Vector w(static_cast<Eigen::Index>(m));
        for (std::size_t i = 0; i < m; ++i) w(static_cast<Eigen::Index>(i)) = static_cast<double>(deg[i] + 1);
        s.mu = w / w.sum();
    } else {
        s.mu = Vector::Constant(static_cast<Eigen::Index>(m), 1.0 / static_cast<double>(m));
    }
    s.graph = std::move(graph);
    return s;
}

}  // namespace rdkg::kg
