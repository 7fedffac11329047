#include "testkit.hpp"

#include "rdkg/errors.hpp"
#include "rdkg/llm.hpp"
#include "rdkg/log.hpp"

#include <gtest/gtest.h>

using namespace rdkg;
using namespace rdkg::llm;

namespace {

class QuietLog : public ::testing::Test {
protected:
    void SetUp() override { log::set_quiet(true); }
    void TearDown() override { log::set_quiet(false); }
};

const char* kNaming = "Give a label";
const char* kFocusEdges = "Propose edges connecting";
const char* kGraphEdges = "Propose missing edges";
const char* kBootstrap = "three stages";

kg::KnowledgeGraph three_nodes() {
    kg::KnowledgeGraph g;
    g.nodes = {testkit::node("a", "Gradient descent", "iterative minimization by following the negative gradient"),
               testkit::node("b", "Learning rate", "step size of gradient descent"),
               testkit::node("c", "Breadth-first search", "graph traversal by levels")};
    return g;
}

}  // namespace

using Fallback = QuietLog;
using Bootstrap = QuietLog;
using Namer = QuietLog;
using Edges = QuietLog;

TEST_F(Fallback, HeadingsBecomeNodesWithPartOfEdges) {
    const auto g = fallback_bootstrap(lecture::parse_markdown("# A\n## B\n\ntext under b\n"));
    ASSERT_EQ(g.nodes.size(), 2u);
    EXPECT_EQ(g.nodes[0].id, "n1");
    EXPECT_EQ(g.nodes[0].label, "A");
    EXPECT_EQ(g.nodes[1].label, "B");
    EXPECT_EQ(g.nodes[1].definition, "text under b");
    ASSERT_EQ(g.edges.size(), 1u);
    EXPECT_EQ(g.edges[0].src, "n2");
    EXPECT_EQ(g.edges[0].dst, "n1");
    EXPECT_EQ(g.edges[0].relation, "partOf");
    EXPECT_EQ(g.nodes[1].confidence, 0.5);
    ASSERT_TRUE(g.nodes[1].provenance);
    EXPECT_EQ(g.nodes[1].provenance->origin, "fallback");
    EXPECT_EQ(g.nodes[1].provenance->section_path, (std::vector<std::string>{"A", "B"}));
    EXPECT_TRUE(kg::validate_graph(g).empty());
}

TEST_F(Bootstrap, NoClientUsesFallback) {
    const auto g = bootstrap_kg("# A\n\nx\n\n# B\n\ny\n", nullptr);
    EXPECT_EQ(g.nodes.size(), 2u);
    EXPECT_TRUE(g.edges.empty());
    EXPECT_THROW(bootstrap_kg("   \n", nullptr), InputError);
    EXPECT_THROW(bootstrap_kg("just prose, no heading\n", nullptr), InputError);
}

TEST_F(Bootstrap, ValidatedLlmGraphDropsBadElements) {
    testkit::ScriptedLlm llm;
    llm.on(kBootstrap, R"(Here you go:
```json
{"nodes": [
  {"id": "x", "label": "Ridge", "definition": "penalized", "confidence": 0.9, "rationale": "line 3",
   "provenance": {"section_path": ["A"], "line_span": [1, 3], "excerpt": "penalized"}},
  {"id": "y", "label": "Lasso", "definition": "sparse", "confidence": 0.8, "rationale": "line 5",
   "provenance": {"section_path": ["A"], "line_span": [4, 5], "excerpt": "sparse"}},
  {"id": "z", "label": "", "confidence": 0.8, "rationale": "r", "provenance": {"section_path": [], "excerpt": ""}},
  {"id": "w", "label": "No rationale", "confidence": 0.8, "provenance": {"section_path": [], "excerpt": ""}}
 ],
 "edges": [
  {"src": "x", "dst": "y", "relation": "contrastsWith", "confidence": 0.7, "rationale": "both penalize",
   "provenance": {"section_path": ["A"], "excerpt": "penalize"}},
  {"src": "x", "dst": "y", "relation": "causes", "confidence": 0.7, "rationale": "r",
   "provenance": {"section_path": ["A"], "excerpt": "e"}},
  {"src": "x", "dst": "q", "relation": "uses", "confidence": 0.7, "rationale": "r",
   "provenance": {"section_path": ["A"], "excerpt": "e"}}
 ]}
```)");
    const auto g = bootstrap_kg("# A\n\npenalized sparse\n", &llm);
    ASSERT_EQ(g.nodes.size(), 2u);
    EXPECT_EQ(g.nodes[0].id, "x");
    ASSERT_EQ(g.edges.size(), 1u);
    EXPECT_EQ(g.edges[0].relation, "contrastsWith");
    EXPECT_EQ(llm.calls, 1);
    EXPECT_NE(llm.prompts[0].find("1: # A"), std::string::npos);  // lines are numbered
}

TEST_F(Bootstrap, ExtraRelationsAreAccepted) {
    testkit::ScriptedLlm llm;
    llm.on(kBootstrap, R"({"nodes": [
  {"id": "x", "label": "X", "confidence": 1, "rationale": "r", "provenance": {"section_path": [], "excerpt": ""}},
  {"id": "y", "label": "Y", "confidence": 1, "rationale": "r", "provenance": {"section_path": [], "excerpt": ""}}],
 "edges": [{"src": "x", "dst": "y", "relation": "causes", "confidence": 0.5, "rationale": "r",
            "provenance": {"section_path": [], "excerpt": ""}}]})");
    const kg::RelationOntology onto({"causes"});
    const auto g = bootstrap_kg("# A\n\nbody\n", &llm, onto);
    EXPECT_EQ(g.edges.size(), 1u);
}

TEST_F(Bootstrap, UnusableReplyFallsBack) {
    testkit::ScriptedLlm llm;
    llm.on(kBootstrap, "I cannot help with that.");
    const auto g = bootstrap_kg("# A\n## B\n", &llm);
    EXPECT_EQ(g.nodes.size(), 2u);
    EXPECT_EQ(g.nodes[0].provenance->origin, "fallback");

    testkit::ScriptedLlm down;
    down.on(kBootstrap, std::nullopt);
    EXPECT_EQ(bootstrap_kg("# A\n## B\n", &down).nodes.size(), 2u);
}

TEST_F(Namer, TfIdfHandOracle) {
    // N = 3; df(pivot) = 1, df(tableau) = 2, df(simplex) = 1.
    // pivot: 2 ln 4; tableau: ln 2.5; simplex: ln 4.
    const ConceptNamer namer({"pivot tableau pivot", "tableau simplex", "dual"});
    EXPECT_EQ(namer.tfidf_label({"pivot tableau pivot", "simplex"}), "Pivot Simplex Tableau");
    EXPECT_EQ(namer.name({"pivot tableau pivot", "simplex"}), "Pivot Simplex Tableau");
    EXPECT_EQ(namer.tfidf_label({"the of and"}).rfind("Concept ", 0), 0u);
    EXPECT_THROW(namer.name({}), InputError);
}

TEST_F(Namer, ClientLabelUsedVerbatim) {
    testkit::ScriptedLlm llm;
    llm.on(kNaming, "{\"label\": \"Simplex  Method\"}");
    const ConceptNamer namer({"a"}, &llm);
    EXPECT_EQ(namer.name({"pivot"}), "Simplex Method");

    testkit::ScriptedLlm raw;
    raw.on(kNaming, "Dual Simplex");
    EXPECT_EQ(ConceptNamer({"a"}, &raw).name({"pivot"}), "Dual Simplex");
}

TEST_F(Namer, EmptyOrFailedReplyFallsBack) {
    testkit::ScriptedLlm empty;
    empty.on(kNaming, "   ");
    EXPECT_EQ(ConceptNamer({"pivot"}, &empty).name({"pivot"}), "Pivot");
    testkit::ScriptedLlm down;
    down.on(kNaming, std::nullopt);
    EXPECT_EQ(ConceptNamer({"pivot"}, &down).name({"pivot"}), "Pivot");
}

TEST_F(Edges, ValidProposalIsUsed) {
    const auto g = three_nodes();
    const embed::HashEmbeddingProvider provider;
    testkit::ScriptedLlm llm;
    llm.on(kFocusEdges,
           R"({"edges": [{"src": "b", "dst": "a", "relation": "partOf", "confidence": 0.8, "rationale": "parameter"}]})");
    const auto e = propose_label_edges(g, "b", provider, &llm);
    ASSERT_EQ(e.size(), 1u);
    EXPECT_EQ(e[0].dst, "a");
    EXPECT_EQ(e[0].relation, "partOf");
    EXPECT_EQ(e[0].confidence, 0.8);
}

TEST_F(Edges, InvalidProposalsFallBackToNearestNode) {
    const auto g = three_nodes();
    const embed::HashEmbeddingProvider provider;
    testkit::ScriptedLlm llm;
    llm.on(kFocusEdges, R"({"edges": [
        {"src": "b", "dst": "b", "relation": "relatedTo", "confidence": 0.8, "rationale": "self"},
        {"src": "a", "dst": "c", "relation": "relatedTo", "confidence": 0.8, "rationale": "not touching b"},
        {"src": "b", "dst": "a", "relation": "causes", "confidence": 0.8, "rationale": "unknown relation"}]})");
    const auto e = propose_label_edges(g, "b", provider, &llm);
    ASSERT_EQ(e.size(), 1u);
    EXPECT_EQ(e[0].src, "b");
    EXPECT_EQ(e[0].dst, "a");  // shares "gradient descent" with b
    EXPECT_EQ(e[0].relation, "relatedTo");
    EXPECT_EQ(e[0].confidence, 0.3);

    EXPECT_EQ(propose_label_edges(g, "b", provider, nullptr), e);
    kg::KnowledgeGraph lone;
    lone.nodes = {testkit::node("a", "A", "")};
    EXPECT_TRUE(propose_label_edges(lone, "a", provider, nullptr).empty());
    EXPECT_THROW(propose_label_edges(g, "zz", provider, nullptr), InputError);
}

TEST_F(Edges, GraphProposalsAreValidatedOneByOne) {
    const auto g = three_nodes();
    testkit::ScriptedLlm llm;
    llm.on(kGraphEdges, R"({"edges": [
        {"src": "a", "dst": "b", "relation": "uses", "confidence": 0.9, "rationale": "step size"},
        {"src": "b", "dst": "a", "relation": "uses", "confidence": 0.9, "rationale": "duplicate"},
        {"src": "a", "dst": "c", "relation": "relatedTo", "confidence": 1.5, "rationale": "bad confidence"},
        {"src": "a", "dst": "c", "relation": "relatedTo", "confidence": 0.5, "rationale": "  "}]})");
    const auto e = propose_graph_edges(g, &llm);
    ASSERT_EQ(e.size(), 1u);
    EXPECT_EQ(e[0].relation, "uses");
    EXPECT_TRUE(propose_graph_edges(g, nullptr).empty());
}

TEST(EdgePrompt, CarriesOnlyLabelsDefinitionsAndEdges) {
    auto g = three_nodes();
    g.nodes[0].provenance = kg::Provenance{{"secret section"}, std::nullopt, "secret excerpt", std::nullopt, {}};
    g.edges = {testkit::edge("a", "b", "uses")};
    const auto p = prompts::edge_user(g, {}, "c");
    EXPECT_NE(p.find("Gradient descent"), std::string::npos);
    EXPECT_NE(p.find("a uses b"), std::string::npos);
    EXPECT_EQ(p.find("secret"), std::string::npos);
}

TEST(ExtractJson, FindsFirstBalancedObject) {
    EXPECT_EQ((*extract_json_object("noise {\"a\": \"}{\", \"b\": {\"c\": 1}} tail"))["b"]["c"], 1);
    EXPECT_EQ((*extract_json_object("```json\n{\"x\": 2}\n```"))["x"], 2);
    EXPECT_FALSE(extract_json_object("no json here"));
    EXPECT_FALSE(extract_json_object("{broken"));
    EXPECT_EQ((*extract_json_object("{bad} then {\"ok\": true}"))["ok"], true);
}

TEST(ValidateProposal, Reasons) {
    const auto g = three_nodes();
    const kg::RelationOntology onto;
    auto reason = [&](const char* doc) {
        const auto r = validate_proposal(nlohmann::json::parse(doc), g, onto);
        return std::holds_alternative<std::string>(r) ? std::get<std::string>(r) : std::string();
    };
    EXPECT_NE(reason(R"({"src": "a", "dst": "q", "relation": "uses", "confidence": 1, "rationale": "r"})").find("unknown"),
              std::string::npos);
    EXPECT_NE(reason(R"({"src": "a", "dst": "b", "relation": "uses", "rationale": "r"})").find("confidence"),
              std::string::npos);
    EXPECT_EQ(reason(R"({"src": "a", "dst": "b", "relation": "uses", "confidence": 0, "rationale": "r"})"), "");
    EXPECT_NE(reason("[1]").find("not an object"), std::string::npos);
}
