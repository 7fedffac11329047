#include "testkit.hpp"

#include "rdkg/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace testkit {

namespace kg = rdkg::kg;

std::filesystem::path data_dir() { return RDKG_TEST_DATA_DIR; }

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Matrix random_distance(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix d = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) d(i, j) = d(j, i) = u(rng);
    }
    return d;
}

Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
    }
    return m;
}

double gw_four_index(const Matrix& c1, const Matrix& c2, const Matrix& plan) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < plan.rows(); ++i)
        for (Eigen::Index j = 0; j < plan.cols(); ++j)
            for (Eigen::Index k = 0; k < plan.rows(); ++k)
                for (Eigen::Index l = 0; l < plan.cols(); ++l) {
                    const double diff = c1(i, k) - c2(j, l);
                    s += diff * diff * plan(i, j) * plan(k, l);
                }
    return s;
}

double grid_entropic_2x2(const Matrix& cost, double eps) {
    auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
    auto f = [&](double t) {
        const double s = 0.5 - t;
        return (cost(0, 0) + cost(1, 1)) * t + (cost(0, 1) + cost(1, 0)) * s + eps * 2.0 * (xlogx(t) + xlogx(s));
    };
    constexpr int kSteps = 20000;
    const double h = 0.5 / kSteps;
    int best = 0;
    for (int k = 1; k <= kSteps; ++k) {
        if (f(k * h) < f(best * h)) best = k;
    }
    double lo = std::max(0.0, (best - 1) * h);
    double hi = std::min(0.5, (best + 1) * h);
    for (int it = 0; it < 200; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (f(m1) < f(m2)) hi = m2;
        else lo = m1;
    }
    return std::min(f(0.5 * (lo + hi)), f(best * h));
}

double best_permutation_distortion(const Matrix& d_z, const Matrix& d_v, const Matrix& feat, double lambda) {
    const int n = static_cast<int>(d_z.rows());
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        Matrix p = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i) p(i, perm[static_cast<std::size_t>(i)]) = 1.0 / n;
        const double s = gw_four_index(d_z, d_v, p);
        const double fe = (feat.array() * p.array()).sum();
        best = std::min(best, (1.0 - lambda) * s + lambda * fe);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

std::unique_ptr<Scenario> make_scenario(const std::string& markdown, rdkg::llm::LlmClient* client) {
    auto s = std::make_unique<Scenario>();
    s->provider = std::make_unique<rdkg::embed::HashEmbeddingProvider>();
    s->lecture = rdkg::lecture::lecture_space_from_markdown(markdown, *s->provider);
    s->lecture_embeddings = s->provider->embed(s->lecture.texts());
    s->namer = std::make_unique<rdkg::llm::ConceptNamer>(s->lecture.texts(), client);
    s->ctx.lecture = &s->lecture;
    s->ctx.lecture_embeddings = &s->lecture_embeddings;
    s->ctx.provider = s->provider.get();
    s->ctx.namer = s->namer.get();
    s->ctx.client = client;
    return s;
}

kg::ConceptNode node(const std::string& id, const std::string& label, const std::string& definition) {
    kg::ConceptNode n;
    n.id = id;
    n.label = label;
    n.definition = definition;
    return n;
}

kg::RelationEdge edge(const std::string& src, const std::string& dst, const std::string& relation, double confidence) {
    kg::RelationEdge e;
    e.src = src;
    e.dst = dst;
    e.relation = relation;
    e.confidence = confidence;
    return e;
}

namespace {

const char* kStack1 = "A stack pushes and pops items at the top in last-in first-out order.";
const char* kStack2 = "Stack push and pop both touch only the top item of the stack.";
const char* kQueue1 = "A queue enqueues items at the back and dequeues them from the front in first-in first-out order.";
const char* kQueue2 = "Queue enqueue and dequeue operations keep the arrival order of queued items.";
const char* kHash1 = "A hash table maps keys to buckets with a hash function.";
const char* kHash2 = "Hash collisions put several keys into one bucket of the hash table.";
const char* kHeap1 = "A binary heap keeps the smallest priority at the root of a complete tree.";
const char* kHeap2 = "Heap insertion sifts the new priority up until the heap order holds.";

const std::vector<std::string> kPlants = {
    "Photosynthesis in plant leaves turns sunlight into sugar using chlorophyll.",
    "Chlorophyll in leaves absorbs red and blue sunlight for photosynthesis.",
    "Leaves open stomata to take in carbon dioxide for photosynthesis.",
    "Photosynthesis releases oxygen from leaves as sunlight splits water.",
};
const std::vector<std::string> kVolcanoes = {
    "A volcano erupts when molten magma rises through the crust.",
    "Magma that reaches the surface during an eruption is called lava.",
    "Explosive volcano eruptions throw ash and lava bombs into the air.",
    "Lava flows from a volcano cool into basalt rock after the eruption.",
};
const std::vector<std::string> kPoetry = {
    "A sonnet is a poem of fourteen lines with a fixed rhyme scheme.",
    "Iambic pentameter gives each sonnet line five stressed syllables of meter.",
    "Rhyme links the endings of poem lines through matching sounds.",
    "A couplet closes the sonnet with two rhyming lines.",
    "Meter arranges stressed and unstressed syllables in each poem line.",
    "Free verse poems drop regular rhyme and meter.",
    "A stanza groups poem lines the way a paragraph groups sentences.",
    "Enjambment runs a sentence over the end of a poem line.",
};

std::string section(const std::string& title, const std::vector<std::string>& paras) {
    std::string out = "# " + title + "\n\n";
    for (const auto& p : paras) out += p + "\n\n";
    return out;
}

}  // namespace

std::string duplicate_markdown() {
    return section("Stacks", {kStack1, kStack2}) + section("Queues", {kQueue1, kQueue2}) +
           section("Hash Tables", {kHash1, kHash2}) + section("Heaps", {kHeap1, kHeap2});
}

kg::KnowledgeGraph duplicate_kg() {
    kg::KnowledgeGraph g;
    g.nodes.push_back(node("stack", "Stack", std::string(kStack1) + " " + kStack2));
    g.nodes.push_back(node("queue", "Queue", std::string(kQueue1) + " " + kQueue2));
    g.nodes.push_back(node("hash", "Hash Table", std::string(kHash1) + " " + kHash2));
    g.nodes.push_back(node("heap", "Heap", std::string(kHeap1) + " " + kHeap2));
    g.nodes.push_back(node("queue_copy", "Queue", std::string(kQueue1) + " " + kQueue2));
    g.add_edge(edge("queue", "stack", "contrastsWith"));
    g.add_edge(edge("queue", "hash", "relatedTo"));
    g.add_edge(edge("heap", "hash", "relatedTo"));
    g.add_edge(edge("queue_copy", "stack", "contrastsWith"));
    g.add_edge(edge("queue_copy", "hash", "relatedTo"));
    return g;
}

std::string overloaded_markdown() {
    return section("Plants", kPlants) + section("Volcanoes", kVolcanoes) + section("Poetry", kPoetry);
}

kg::KnowledgeGraph overloaded_kg() {
    std::vector<std::string> xy = kPlants;
    xy.insert(xy.end(), kVolcanoes.begin(), kVolcanoes.end());
    kg::KnowledgeGraph g;
    g.nodes.push_back(node(kOverloadedId, "Plants and Volcanoes", rdkg::text::join(xy, " ")));
    g.nodes.push_back(node("poetry", "Poetry", rdkg::text::join(kPoetry, " ")));
    g.add_edge(edge(kOverloadedId, "poetry", "relatedTo"));
    return g;
}

kg::KnowledgeGraph impoverished_kg() {
    const auto root = rdkg::lecture::parse_markdown(read_text(data_dir() / "two_topic.md"));
    auto g = rdkg::llm::fallback_bootstrap(root);
    std::vector<std::string> drop;
    for (const auto& n : g.nodes) {
        if (n.provenance->section_path.front() != "Linear Regression") drop.push_back(n.id);
    }
    for (const auto& id : drop) g.remove_node(id);
    return g;
}

kg::KnowledgeGraph random_graph_with_extras(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nodes_d(2, 8);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<int> small(0, 99);
    const auto& rels = kg::builtin_relations();
    std::uniform_int_distribution<std::size_t> rel_d(0, rels.size() - 1);

    kg::KnowledgeGraph g;
    const int n = nodes_d(rng);
    for (int i = 0; i < n; ++i) {
        auto c = node("c" + std::to_string(i), "Concept " + std::to_string(small(rng)), "definition " + std::to_string(i));
        if (coin(rng)) c.aliases = {"alias" + std::to_string(i), "alt \"quoted\" " + std::to_string(i)};
        if (coin(rng)) {
            kg::Provenance p;
            p.section_path = {"Top", "Sub " + std::to_string(i)};
            if (coin(rng)) p.line_span = std::make_pair(i + 1, i + 3);
            p.excerpt = "excerpt é " + std::to_string(i);
            if (coin(rng)) p.origin = "fallback";
            if (coin(rng)) p.extra["page"] = small(rng);
            c.provenance = p;
        }
        c.confidence = small(rng) / 100.0;
        if (coin(rng)) c.rationale = "because " + std::to_string(i);
        if (coin(rng)) c.extra["x_score"] = small(rng) * 0.25;
        if (coin(rng)) c.extra["tags"] = kg::ordered_json::array({"t1", small(rng)});
        if (coin(rng)) c.extra["zeta_nested"] = kg::ordered_json{{"b", 1}, {"a", {true, nullptr}}};
        g.nodes.push_back(std::move(c));
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (small(rng) >= 35) continue;
            auto e = edge("c" + std::to_string(i), "c" + std::to_string(j), rels[rel_d(rng)], small(rng) / 100.0);
            if (coin(rng)) e.rationale = "edge rationale";
            if (coin(rng)) e.extra["weight_hint"] = small(rng);
            g.add_edge(std::move(e));
        }
    }
    if (coin(rng)) g.extra["meta"] = kg::ordered_json{{"course", "demo"}, {"week", small(rng)}};
    g.extra["schema_version"] = "x-" + std::to_string(small(rng));
    return g;
}

void ScriptedLlm::on(std::string needle, std::optional<std::string> reply) {
    rules_.emplace_back(std::move(needle), std::move(reply));
}

std::optional<std::string> ScriptedLlm::complete(const std::vector<rdkg::llm::ChatMessage>& messages) {
    ++calls;
    std::string all;
    for (const auto& m : messages) all += m.content + "\n";
    prompts.push_back(all);
    for (const auto& [needle, reply] : rules_) {
        if (all.find(needle) != std::string::npos) return reply;
    }
    return std::nullopt;
}

}  // namespace testkit
