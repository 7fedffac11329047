#include "rdkg/llm.hpp"
#include "rdkg/text.hpp"

#include <sstream>

namespace rdkg::llm::prompts {

const char* const kBootstrapSystem =
    "You build concept knowledge graphs from lecture notes. Reply with one JSON object and nothing else.";

const char* const kNamingSystem =
    "You name concepts taught in lecture notes. Reply with one JSON object {\"label\": \"...\"} and nothing else.";

const char* const kEdgeSystem =
    "You propose relations between concepts of an existing knowledge graph. Use only knowledge present in the "
    "graph. Reply with one JSON object and nothing else.";

namespace {

std::string relation_list(const kg::RelationOntology& ontology) {
    std::vector<std::string> names(ontology.relations().begin(), ontology.relations().end());
    return text::join(names, ", ");
}

}  // namespace

std::string bootstrap_user(std::string_view markdown, const kg::RelationOntology& ontology) {
    std::ostringstream os;
    os << "Process the Markdown lecture notes below in three stages.\n"
          "1. Segment the notes into atomic spans: paragraphs, list items, math blocks and code blocks.\n"
          "2. Identify the salient concepts. Give each a canonical label, a one-sentence definition and any "
          "aliases used in the notes.\n"
          "3. Extract edges between those concepts. Every edge relation must be one of: "
       << relation_list(ontology)
       << ".\n\n"
          "Annotate every node and every edge with provenance (section path as a list of heading titles, "
          "line span as [first, last] using the line numbers shown, and a short verbatim excerpt), a "
          "confidence in [0, 1] and a nonempty rationale.\n\n"
          "Output schema:\n"
          "{\n"
          "  \"nodes\": [{\"id\": \"n1\", \"label\": \"...\", \"definition\": \"...\", \"aliases\": [\"...\"],\n"
          "             \"provenance\": {\"path\": [\"...\"], \"line_span\": [1, 2], \"excerpt\": \"...\"},\n"
          "             \"confidence\": 0.9, \"rationale\": \"...\"}],\n"
          "  \"edges\": [{\"src\": \"n1\", \"dst\": \"n2\", \"relation\": \"uses\",\n"
          "             \"provenance\": {\"path\": [\"...\"], \"line_span\": [3, 3], \"excerpt\": \"...\"},\n"
          "             \"confidence\": 0.8, \"rationale\": \"...\"}]\n"
          "}\n\n"
          "Lecture notes:\n";
    std::size_t line = 1;
    std::size_t start = 0;
    while (start <= markdown.size()) {
        std::size_t end = markdown.find('\n', start);
        if (end == std::string_view::npos) end = markdown.size();
        if (start == markdown.size() && end == start) break;
        os << line++ << ": " << markdown.substr(start, end - start) << '\n';
        start = end + 1;
    }
    return os.str();
}

std::string naming_user(const std::vector<std::string>& texts) {
    std::ostringstream os;
    os << "Give a label of at most 6 words for the single concept these lecture passages explain.\n\n";
    for (const auto& t : texts) os << "- " << text::truncate_utf8(t, 600) << '\n';
    return os.str();
}

std::string edge_user(const kg::KnowledgeGraph& graph, const kg::RelationOntology& ontology,
                      const std::string& focus_id) {
    std::ostringstream os;
    if (focus_id.empty()) {
        os << "Propose missing edges between the concepts below.\n";
    } else {
        os << "Propose edges connecting concept " << focus_id << " to the other concepts below.\n";
    }
    os << "Allowed relations: " << relation_list(ontology) << ".\n"
       << "Reply as {\"edges\": [{\"src\": id, \"dst\": id, \"relation\": name, \"confidence\": number in [0, 1], "
          "\"rationale\": text}]}.\n\nConcepts:\n";
    for (const auto& n : graph.nodes) {
        os << "- " << n.id << ": " << n.label;
        if (!n.definition.empty()) os << " -- " << text::truncate_utf8(n.definition, 300);
        os << '\n';
    }
    os << "\nExisting edges:\n";
    for (const auto& e : graph.edges) os << "- " << e.src << ' ' << e.relation << ' ' << e.dst << '\n';
    return os.str();
}

}  // namespace rdkg::llm::prompts
