#include "rdkg/errors.hpp"
#include "rdkg/llm.hpp"
#include "rdkg/log.hpp"
#include "rdkg/text.hpp"

#include <set>

namespace rdkg::llm {

namespace {

constexpr double kFallbackConfidence = 0.5;
constexpr std::size_t kExcerptBytes = 200;
constexpr std::size_t kDefinitionBytes = 1000;

void add_heading_nodes(const lecture::Section& s, const std::string* parent_id, std::vector<std::string>& path,
                       kg::KnowledgeGraph& g) {
    for (const auto& child : s.children) {
        const std::string title = text::normalize_whitespace(child.title);
        path.push_back(child.title);

        kg::ConceptNode n;
        n.id = "n" + std::to_string(g.nodes.size() + 1);
        n.label = title.empty() ? "(untitled)" : title;
        int last_line = child.line;
        if (!child.blocks.empty()) {
            n.definition = text::truncate_utf8(text::normalize_whitespace(child.blocks.front().text), kDefinitionBytes);
            last_line = child.blocks.back().line_end;
        }
        kg::Provenance p;
        p.section_path = path;
        p.line_span = std::make_pair(child.line, last_line);
        p.excerpt = text::truncate_utf8(n.definition.empty() ? n.label : n.definition, kExcerptBytes);
        p.origin = "fallback";
        n.provenance = p;
        n.confidence = kFallbackConfidence;
        n.rationale = "heading at line " + std::to_string(child.line);
        g.nodes.push_back(n);

        if (parent_id != nullptr) {
            kg::RelationEdge e;
            e.src = n.id;
            e.dst = *parent_id;
            e.relation = "partOf";
            e.confidence = kFallbackConfidence;
            kg::Provenance ep;
            ep.section_path = path;
            ep.line_span = std::make_pair(child.line, child.line);
            ep.excerpt = text::truncate_utf8(n.label, kExcerptBytes);
            ep.origin = "fallback";
            e.provenance = ep;
            e.rationale = "subsection of the enclosing heading";
            g.add_edge(std::move(e));
        }
        const std::string id = n.id;
        add_heading_nodes(child, &id, path, g);
        path.pop_back();
    }
}

bool has_rationale(const std::optional<std::string>& r) { return r && !text::trim(*r).empty(); }

kg::KnowledgeGraph graph_from_reply(const kg::ordered_json& doc, const kg::RelationOntology& ontology) {
    kg::KnowledgeGraph g;
    if (doc.contains("nodes") && doc["nodes"].is_array()) {
        for (std::size_t k = 0; k < doc["nodes"].size(); ++k) {
            kg::KnowledgeGraph one;
            try {
                one = kg::kg_from_json(kg::ordered_json{{"nodes", kg::ordered_json::array({doc["nodes"][k]})},
                                                        {"edges", kg::ordered_json::array()}});
            } catch (const std::exception& e) {
                log::warn("dropped bootstrap node " + std::to_string(k) + ": " + e.what());
                continue;
            }
            auto& n = one.nodes.front();
            n.label = text::normalize_whitespace(n.label);
            std::string reason;
            if (n.id.empty()) reason = "empty id";
            else if (g.find(n.id)) reason = "duplicate id " + n.id;
            else if (n.label.empty()) reason = "empty label";
            else if (!(n.confidence >= 0.0 && n.confidence <= 1.0)) reason = "confidence outside [0, 1]";
            else if (!has_rationale(n.rationale)) reason = "missing rationale";
            else if (!n.provenance) reason = "missing provenance";
            if (!reason.empty()) {
                log::warn("dropped bootstrap node " + std::to_string(k) + ": " + reason);
                continue;
            }
            g.nodes.push_back(std::move(n));
        }
    }
    if (doc.contains("edges") && doc["edges"].is_array()) {
        for (std::size_t k = 0; k < doc["edges"].size(); ++k) {
            kg::KnowledgeGraph one;
            try {
                one = kg::kg_from_json(kg::ordered_json{{"nodes", kg::ordered_json::array()},
                                                        {"edges", kg::ordered_json::array({doc["edges"][k]})}});
            } catch (const std::exception& e) {
                log::warn("dropped bootstrap edge " + std::to_string(k) + ": " + e.what());
                continue;
            }
            auto& e = one.edges.front();
            std::string reason;
            if (!g.find(e.src) || !g.find(e.dst)) reason = "dangling endpoint";
            else if (e.src == e.dst) reason = "self-loop";
            else if (!ontology.allows(e.relation)) reason = "relation '" + e.relation + "' not allowed";
            else if (!(e.confidence >= 0.0 && e.confidence <= 1.0)) reason = "confidence outside [0, 1]";
            else if (!has_rationale(e.rationale)) reason = "missing rationale";
            else if (!e.provenance) reason = "missing provenance";
            else if (!g.add_edge(e)) reason = "duplicate edge";
            if (!reason.empty()) log::warn("dropped bootstrap edge " + std::to_string(k) + ": " + reason);
        }
    }
    return g;
}

}  // namespace

kg::KnowledgeGraph fallback_bootstrap(const lecture::Section& root) {
    kg::KnowledgeGraph g;
    std::vector<std::string> path;
    add_heading_nodes(root, nullptr, path, g);
    return g;
}

kg::KnowledgeGraph bootstrap_kg(std::string_view markdown, LlmClient* client, const kg::RelationOntology& ontology) {
    const auto root = lecture::parse_markdown(markdown);
    if (client != nullptr) {
        const auto reply = client->complete(
            {{"system", prompts::kBootstrapSystem}, {"user", prompts::bootstrap_user(markdown, ontology)}});
        if (reply) {
            if (const auto doc = extract_json_object(*reply)) {
                auto g = graph_from_reply(kg::ordered_json::parse(doc->dump()), ontology);
                if (!g.nodes.empty() && kg::validate_graph(g, ontology).empty()) return g;
            }
        }
        log::warn("llm bootstrap produced no valid graph; using heading fallback");
    }
    auto g = fallback_bootstrap(root);
    if (g.nodes.empty()) throw InputError("no headings to bootstrap from");
    return g;
}

}  // namespace rdkg::llm
