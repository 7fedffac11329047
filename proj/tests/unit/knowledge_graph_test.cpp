#include "testkit.hpp"

#include "rdkg/errors.hpp"
#include "rdkg/knowledge_graph.hpp"

#include <gtest/gtest.h>

#include <queue>

using namespace rdkg::kg;
using rdkg::Matrix;
using testkit::edge;
using testkit::node;

namespace {

KnowledgeGraph path_graph(int n) {
    KnowledgeGraph g;
    for (int i = 0; i < n; ++i) g.nodes.push_back(node("v" + std::to_string(i), "Node " + std::to_string(i), ""));
    for (int i = 0; i + 1 < n; ++i) g.add_edge(edge("v" + std::to_string(i), "v" + std::to_string(i + 1), "uses"));
    return g;
}

bool has_kind(const std::vector<Violation>& vs, Violation::Kind k) {
    for (const auto& v : vs) {
        if (v.kind == k) return true;
    }
    return false;
}

}  // namespace

TEST(KnowledgeGraph, RateCountsNodesAndHalfEdges) {
    EXPECT_DOUBLE_EQ(rate(path_graph(4)), 4 + 0.5 * 3);
    EXPECT_DOUBLE_EQ(rate(KnowledgeGraph{}), 0.0);
}

TEST(KnowledgeGraph, AddEdgeRejectsLoopsAndDuplicates) {
    auto g = path_graph(2);
    EXPECT_FALSE(g.add_edge(edge("v0", "v0", "uses")));
    EXPECT_FALSE(g.add_edge(edge("v1", "v0", "uses")));
    EXPECT_TRUE(g.add_edge(edge("v1", "v0", "isA")));
    EXPECT_TRUE(g.connected("v0", "v1"));
    EXPECT_EQ(g.edges.size(), 2u);
}

TEST(KnowledgeGraph, RemoveNodeDropsIncidentEdges) {
    auto g = path_graph(3);
    g.remove_node("v1");
    EXPECT_EQ(g.nodes.size(), 2u);
    EXPECT_TRUE(g.edges.empty());
}

TEST(KnowledgeGraph, FreshId) {
    auto g = path_graph(2);
    EXPECT_EQ(g.fresh_id("v"), "v2");
    EXPECT_EQ(g.fresh_id("n"), "n1");
}

TEST(KnowledgeGraph, ValidationReportsEachViolation) {
    KnowledgeGraph g = path_graph(2);
    g.nodes.push_back(node("v0", "dup", ""));
    g.nodes.push_back(node("blank", "", ""));
    g.nodes.back().confidence = 1.5;
    g.edges.push_back(edge("v0", "ghost", "uses"));
    g.edges.push_back(edge("v0", "v1", "causes"));
    g.edges.push_back(edge("v1", "v1", "uses"));
    g.edges.push_back(edge("v1", "v0", "uses"));
    const auto vs = validate_graph(g);
    EXPECT_TRUE(has_kind(vs, Violation::Kind::DuplicateId));
    EXPECT_TRUE(has_kind(vs, Violation::Kind::EmptyLabel));
    EXPECT_TRUE(has_kind(vs, Violation::Kind::BadConfidence));
    EXPECT_TRUE(has_kind(vs, Violation::Kind::DanglingEndpoint));
    EXPECT_TRUE(has_kind(vs, Violation::Kind::UnknownRelation));
    EXPECT_TRUE(has_kind(vs, Violation::Kind::SelfLoop));
    EXPECT_TRUE(has_kind(vs, Violation::Kind::DuplicateEdge));
    EXPECT_TRUE(validate_graph(path_graph(3)).empty());
}

TEST(KnowledgeGraph, OntologyExtras) {
    RelationOntology base;
    EXPECT_TRUE(base.allows("relatedTo"));
    EXPECT_FALSE(base.allows("causes"));
    RelationOntology extended({"causes"});
    EXPECT_TRUE(extended.allows("causes"));
}

TEST(KnowledgeGraph, NodeText) {
    auto n = node("a", "Label", "Definition");
    n.aliases = {"x", "y", "z", "w"};
    EXPECT_EQ(node_text(n), "Label. Definition. x; y; z");
    EXPECT_EQ(node_text(node("b", "Only", "")), "Only");
}

TEST(KnowledgeGraph, HopDistanceMatchesBfsOracle) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> coin(0, 3);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 7;
        KnowledgeGraph g;
        for (int i = 0; i < n; ++i) g.nodes.push_back(node("v" + std::to_string(i), "n", ""));
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (coin(rng) == 0) {
                    g.add_edge(edge("v" + std::to_string(i), "v" + std::to_string(j), "uses"));
                    adj[i].push_back(j);
                    adj[j].push_back(i);
                }
            }
        }
        // Floyd-Warshall oracle with unreachable = max finite + 1.
        const int inf = 1 << 20;
        std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
        for (int i = 0; i < n; ++i) {
            d[i][i] = 0;
            for (int j : adj[i]) d[i][j] = 1;
        }
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
        int maxf = 0;
        for (auto& row : d)
            for (int x : row)
                if (x < inf) maxf = std::max(maxf, x);
        const Matrix h = hop_distance(g);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) EXPECT_EQ(h(i, j), d[i][j] < inf ? d[i][j] : maxf + 1) << i << "," << j;
    }
}

TEST(KnowledgeGraph, StructDistanceNormalized) {
    const Matrix s = struct_distance(path_graph(3));
    EXPECT_DOUBLE_EQ(s(0, 2), 1.0);
    EXPECT_DOUBLE_EQ(s(0, 1), 0.5);
    KnowledgeGraph single;
    single.nodes.push_back(node("a", "A", ""));
    EXPECT_TRUE(struct_distance(single).isZero());
}

TEST(KnowledgeGraph, KgSpaceMeasures) {
    rdkg::embed::HashEmbeddingProvider p;
    const auto g = path_graph(3);
    const auto emb = p.embed(node_texts(g));
    const auto uni = build_kg_space(g, emb);
    EXPECT_TRUE(uni.mu.isApprox(rdkg::Vector::Constant(3, 1.0 / 3.0)));
    EXPECT_TRUE(rdkg::is_unit_distance_matrix(uni.d));
    const auto deg = build_kg_space(g, emb, {}, NodeMeasure::Degree);
    EXPECT_NEAR(deg.mu.sum(), 1.0, 1e-12);
    EXPECT_GT(deg.mu(1), deg.mu(0));
    EXPECT_THROW(build_kg_space(KnowledgeGraph{}, emb), rdkg::InputError);
}
