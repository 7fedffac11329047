#include "rdkg/errors.hpp"
#include "rdkg/knowledge_graph.hpp"

#include <fstream>
#include <sstream>

namespace rdkg::kg {

namespace {

bool is_known(const std::string& key, std::initializer_list<const char*> known) {
    for (const char* k : known) {
        if (key == k) return true;
    }
    return false;
}

ordered_json collect_extra(const ordered_json& obj, std::initializer_list<const char*> known) {
    ordered_json extra = ordered_json::object();
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!is_known(it.key(), known)) extra[it.key()] = it.value();
    }
    return extra;
}

void append_extra(ordered_json& obj, const ordered_json& extra) {
    for (auto it = extra.begin(); it != extra.end(); ++it) obj[it.key()] = it.value();
}

ordered_json provenance_to_json(const Provenance& p) {
    ordered_json j = ordered_json::object();
    j["path"] = p.section_path;
    if (p.line_span) {
        j["line_span"] = {p.line_span->first, p.line_span->second};
    } else {
        j["line_span"] = nullptr;
    }
    j["excerpt"] = p.excerpt;
    if (p.origin) j["origin"] = *p.origin;
    append_extra(j, p.extra);
    return j;
}

Provenance provenance_from_json(const ordered_json& j) {
    if (!j.is_object()) throw InputError("provenance must be an object");
    Provenance p;
    if (j.contains("path")) p.section_path = j["path"].get<std::vector<std::string>>();
    if (j.contains("line_span") && !j["line_span"].is_null()) {
        const auto& ls = j["line_span"];
        if (!ls.is_array() || ls.size() != 2) throw InputError("provenance.line_span must be [begin, end]");
        p.line_span = std::make_pair(ls[0].get<int>(), ls[1].get<int>());
    }
    if (j.contains("excerpt")) p.excerpt = j["excerpt"].get<std::string>();
    if (j.contains("origin")) p.origin = j["origin"].get<std::string>();
    p.extra = collect_extra(j, {"path", "line_span", "excerpt", "origin"});
    return p;
}

ConceptNode node_from_json(const ordered_json& j) {
    if (!j.is_object()) throw InputError("node must be an object");
    ConceptNode n;
    n.id = j.at("id").get<std::string>();
    if (j.contains("label")) n.label = j["label"].get<std::string>();
    if (j.contains("definition") && !j["definition"].is_null()) n.definition = j["definition"].get<std::string>();
    if (j.contains("aliases") && !j["aliases"].is_null()) n.aliases = j["aliases"].get<std::vector<std::string>>();
    if (j.contains("provenance") && !j["provenance"].is_null()) n.provenance = provenance_from_json(j["provenance"]);
    if (j.contains("confidence")) n.confidence = j["confidence"].get<double>();
    if (j.contains("rationale") && !j["rationale"].is_null()) n.rationale = j["rationale"].get<std::string>();
    n.extra = collect_extra(j, {"id", "label", "definition", "aliases", "provenance", "confidence", "rationale"});
    return n;
}

RelationEdge edge_from_json(const ordered_json& j) {
    if (!j.is_object()) throw InputError("edge must be an object");
    RelationEdge e;
    e.src = j.at("src").get<std::string>();
    e.dst = j.at("dst").get<std::string>();
    e.relation = j.at("relation").get<std::string>();
    if (j.contains("confidence")) e.confidence = j["confidence"].get<double>();
    if (j.contains("provenance") && !j["provenance"].is_null()) e.provenance = provenance_from_json(j["provenance"]);
    if (j.contains("rationale") && !j["rationale"].is_null()) e.rationale = j["rationale"].get<std::string>();
    e.extra = collect_extra(j, {"src", "dst", "relation", "confidence", "provenance", "rationale"});
    return e;
}

}  // namespace

ordered_json to_json(const KnowledgeGraph& graph) {
    ordered_json doc = ordered_json::object();
    doc["nodes"] = ordered_json::array();
    for (const auto& n : graph.nodes) {
        ordered_json j = ordered_json::object();
        j["id"] = n.id;
        j["label"] = n.label;
        j["definition"] = n.definition;
        j["aliases"] = n.aliases;
        if (n.provenance) j["provenance"] = provenance_to_json(*n.provenance);
        j["confidence"] = n.confidence;
        if (n.rationale) j["rationale"] = *n.rationale;
        append_extra(j, n.extra);
        doc["nodes"].push_back(std::move(j));
    }
    doc["edges"] = ordered_json::array();
    for (const auto& e : graph.edges) {
        ordered_json j = ordered_json::object();
        j["src"] = e.src;
        j["dst"] = e.dst;
        j["relation"] = e.relation;
        j["confidence"] = e.confidence;
        if (e.provenance) j["provenance"] = provenance_to_json(*e.provenance);
        if (e.rationale) j["rationale"] = *e.rationale;
        append_extra(j, e.extra);
        doc["edges"].push_back(std::move(j));
    }
    append_extra(doc, graph.extra);
    return doc;
}

KnowledgeGraph kg_from_json(const ordered_json& doc) {
    if (!doc.is_object()) throw InputError("knowledge graph must be a JSON object");
    KnowledgeGraph g;
    try {
        const auto& nodes = doc.at("nodes");
        if (!nodes.is_array()) throw InputError("nodes must be an array");
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            try {
                g.nodes.push_back(node_from_json(nodes[i]));
            } catch (const std::exception& e) {
                throw InputError("node " + std::to_string(i) + ": " + e.what());
            }
        }
        if (doc.contains("edges")) {
            const auto& edges = doc["edges"];
            if (!edges.is_array()) throw InputError("edges must be an array");
            for (std::size_t i = 0; i < edges.size(); ++i) {
                try {
                    g.edges.push_back(edge_from_json(edges[i]));
                } catch (const std::exception& e) {
                    throw InputError("edge " + std::to_string(i) + ": " + e.what());
                }
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed knowledge graph: ") + e.what());
    }
    g.extra = collect_extra(doc, {"nodes", "edges"});
    return g;
}

std::string dump_kg(const KnowledgeGraph& graph) {
    return to_json(graph).dump(2) + "\n";
}

KnowledgeGraph load_kg(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("file not found: " + path.string());
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("malformed JSON in " + path.string() + ": " + e.what());
    }
    return kg_from_json(doc);
}

void save_kg(const std::filesystem::path& path, const KnowledgeGraph& graph) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << dump_kg(graph);
}

}  // namespace rdkg::kg
