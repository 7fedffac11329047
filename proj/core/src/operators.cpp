#include "rdkg/errors.hpp"
#include "rdkg/log.hpp"
#include "rdkg/refinement.hpp"
#include "rdkg/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace rdkg::refine {

namespace {

constexpr std::size_t kDefinitionBytes = 1000;
constexpr std::size_t kExcerptBytes = 200;
constexpr double kNewNodeConfidence = 0.5;
constexpr double kRelateConfidence = 0.5;
constexpr std::size_t kTopRows = 5;
constexpr std::size_t kMinSplitRows = 4;

// Ids minted in iteration t look like "t3n1", so ids freed by earlier
// removals are never reused within a run.
std::string node_prefix(int iteration) { return "t" + std::to_string(iteration) + "n"; }

std::string edge_id(const kg::RelationEdge& e) { return e.src + ":" + e.relation + ":" + e.dst; }

EditRecord record(std::string op, std::vector<std::string> ids, std::string rationale, int iteration) {
    return EditRecord{std::move(op), std::move(ids), std::move(rationale), iteration};
}

std::vector<std::string> unit_texts(const lecture::LectureSpace& lecture, const std::vector<std::size_t>& rows) {
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(lecture.elements[r].content);
    return out;
}

kg::Provenance group_provenance(const lecture::LectureSpace& lecture, const std::vector<std::size_t>& rows) {
    const auto& first = lecture.elements[rows.front()];
    int end = first.line_end;
    for (auto r : rows) end = std::max(end, lecture.elements[r].line_end);
    kg::Provenance p;
    p.section_path = first.section_path;
    p.line_span = std::make_pair(first.line_begin, end);
    p.excerpt = text::truncate_utf8(first.content, kExcerptBytes);
    p.origin = "refinement";
    return p;
}

std::string definition_of(const std::vector<std::string>& texts) {
    return text::truncate_utf8(text::join(texts, " "), kDefinitionBytes);
}

std::vector<double> column_distribution(const Matrix& plan, Eigen::Index j) {
    const double total = plan.col(j).sum();
    std::vector<double> p(static_cast<std::size_t>(plan.rows()));
    for (Eigen::Index i = 0; i < plan.rows(); ++i) p[static_cast<std::size_t>(i)] = plan(i, j) / total;
    return p;
}

void check_graph_matches(const kg::KnowledgeGraph& graph, const ot::Coupling& pi) {
    if (static_cast<Eigen::Index>(graph.nodes.size()) != pi.cols()) {
        throw InputError("coupling has " + std::to_string(pi.cols()) + " columns for " +
                         std::to_string(graph.nodes.size()) + " nodes");
    }
}

}  // namespace

void RefinementConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InputError(std::string(name) + " must be > 0");
    };
    positive(beta, "beta");
    positive(theta_add, "theta_add");
    positive(theta_split, "theta_split");
    positive(theta_merge, "theta_merge");
    positive(theta_cos, "theta_cos");
    positive(theta_relate, "theta_relate");
    positive(tau, "tau");
    positive(conv_threshold, "conv_threshold");
    positive(kl_smoothing, "kl_smoothing");
    if (max_adds < 0 || max_splits < 0 || max_merges < 0) throw InputError("operator caps must be >= 0");
    if (max_iterations < 0) throw InputError("max_iterations must be >= 0");
    if (patience < 1) throw InputError("patience must be >= 1");
}

Vector covered_row_mass(const ot::Coupling& pi, const Matrix& feat, double tol) {
    if (feat.rows() != pi.rows() || feat.cols() != pi.cols()) throw InputError("covered_row_mass: shape mismatch");
    Vector rho = Vector::Zero(pi.rows());
    for (Eigen::Index i = 0; i < pi.rows(); ++i) {
        for (Eigen::Index j = 0; j < pi.cols(); ++j) {
            if (feat(i, j) <= tol) rho(i) += pi.plan(i, j);
        }
    }
    return rho;
}

Vector column_entropy(const ot::Coupling& pi, bool normalized) {
    const Eigen::Index n = pi.rows();
    Vector h = Vector::Zero(pi.cols());
    for (Eigen::Index j = 0; j < pi.cols(); ++j) {
        const double total = pi.plan.col(j).sum();
        if (!(total > 0.0)) continue;
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = pi.plan(i, j) / total;
            if (p > 0.0) acc -= p * std::log(p);
        }
        if (normalized) acc = n > 1 ? acc / std::log(static_cast<double>(n)) : 0.0;
        h(j) = std::max(acc, 0.0);
    }
    return h;
}

double symmetric_kl(std::span<const double> p, std::span<const double> q, double smoothing) {
    if (p.size() != q.size()) throw InputError("symmetric_kl: length mismatch");
    if (p.empty()) return 0.0;
    auto smooth = [&](std::span<const double> v) {
        std::vector<double> out(v.begin(), v.end());
        double total = 0.0;
        for (auto& x : out) total += (x += smoothing);
        for (auto& x : out) x /= total;
        return out;
    };
    const auto ps = smooth(p);
    const auto qs = smooth(q);
    double pq = 0.0;
    double qp = 0.0;
    for (std::size_t k = 0; k < ps.size(); ++k) {
        pq += ps[k] * std::log(ps[k] / qs[k]);
        qp += qs[k] * std::log(qs[k] / ps[k]);
    }
    return std::max(0.0, 0.5 * (pq + qp));
}

double edge_support(const ot::Coupling& pi, const kg::KnowledgeGraph& graph, const kg::RelationEdge& edge) {
    const auto a = graph.index_of(edge.src);
    const auto b = graph.index_of(edge.dst);
    if (!a || !b || static_cast<Eigen::Index>(std::max(*a, *b)) >= pi.cols()) {
        throw InputError("edge_support: unmapped endpoint in " + edge_id(edge));
    }
    return pi.plan.col(static_cast<Eigen::Index>(*a)).sum() * pi.plan.col(static_cast<Eigen::Index>(*b)).sum();
}

std::vector<std::size_t> top_rows(const Matrix& plan, Eigen::Index j, std::size_t k) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(plan.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return plan(static_cast<Eigen::Index>(a), j) > plan(static_cast<Eigen::Index>(b), j);
    });
    idx.resize(std::min(k, idx.size()));
    return idx;
}

OpResult op_add(const kg::KnowledgeGraph& graph, const Alignment& a, const Context& ctx, int iteration) {
    const auto& cfg = ctx.config;
    const auto& lecture = *ctx.lecture;
    OpResult out{graph, {}};
    if (cfg.max_adds == 0) return out;

    const double tol = analysis::coverage_tolerance(a.feat, cfg.tolerance_mode);
    Vector rho = covered_row_mass(a.coupling(), a.feat, tol);
    if (cfg.fractional_add) {
        for (Eigen::Index i = 0; i < rho.size(); ++i) rho(i) /= a.coupling().mu_row(i);
    }

    // Maximal runs of consecutive flagged units within one section.
    struct Group {
        std::vector<std::size_t> rows;
        double key = 0.0;
    };
    std::vector<Group> groups;
    for (std::size_t i = 0; i < lecture.size(); ++i) {
        const double r = rho(static_cast<Eigen::Index>(i));
        if (!(r < cfg.theta_add)) continue;
        const bool extend = !groups.empty() && groups.back().rows.back() + 1 == i &&
                            lecture.elements[groups.back().rows.back()].section_path == lecture.elements[i].section_path;
        if (extend) {
            groups.back().rows.push_back(i);
            groups.back().key = std::min(groups.back().key, r);
        } else {
            groups.push_back({{i}, r});
        }
    }
    std::stable_sort(groups.begin(), groups.end(), [](const Group& x, const Group& y) { return x.key < y.key; });
    if (groups.size() > static_cast<std::size_t>(cfg.max_adds)) groups.resize(static_cast<std::size_t>(cfg.max_adds));

    for (const auto& g : groups) {
        const auto texts = unit_texts(lecture, g.rows);
        kg::ConceptNode n;
        n.id = out.graph.fresh_id(node_prefix(iteration));
        n.label = ctx.namer->name(texts);
        n.definition = definition_of(texts);
        n.provenance = group_provenance(lecture, g.rows);
        n.confidence = kNewNodeConfidence;
        n.rationale = "under-covered units " + lecture.elements[g.rows.front()].id + ".." +
                      lecture.elements[g.rows.back()].id + " (covered mass " + text::format_sig9(g.key) + ")";
        out.graph.nodes.push_back(n);

        std::vector<std::string> ids{n.id};
        for (auto& e : llm::propose_label_edges(out.graph, n.id, *ctx.provider, ctx.client, ctx.ontology)) {
            const std::string eid = edge_id(e);
            if (out.graph.add_edge(std::move(e))) ids.push_back(eid);
        }
        out.edits.push_back(record("add", std::move(ids), *n.rationale, iteration));
    }
    return out;
}

OpResult op_split(const kg::KnowledgeGraph& graph, const Alignment& a, const Context& ctx, int iteration) {
    const auto& cfg = ctx.config;
    const auto& pi = a.coupling();
    check_graph_matches(graph, pi);
    OpResult out{graph, {}};
    if (cfg.max_splits == 0) return out;

    const Vector h = column_entropy(pi, !cfg.raw_entropy);
    std::vector<Eigen::Index> cand;
    for (Eigen::Index j = 0; j < h.size(); ++j) {
        if (h(j) > cfg.theta_split) cand.push_back(j);
    }
    std::stable_sort(cand.begin(), cand.end(), [&](Eigen::Index x, Eigen::Index y) { return h(x) > h(y); });

    int done = 0;
    for (const Eigen::Index j : cand) {
        if (done >= cfg.max_splits) break;
        const double mean = pi.plan.col(j).sum() / static_cast<double>(pi.rows());
        std::vector<std::size_t> subset;
        for (Eigen::Index i = 0; i < pi.rows(); ++i) {
            if (pi.plan(i, j) > mean) subset.push_back(static_cast<std::size_t>(i));
        }
        if (subset.size() < kMinSplitRows) continue;

        const auto km = two_means(ctx.lecture_embeddings->select_rows(subset));
        std::vector<std::size_t> part[2];
        for (std::size_t k = 0; k < subset.size(); ++k) part[km.labels[k]].push_back(subset[k]);
        if (part[0].empty() || part[1].empty()) continue;

        const kg::ConceptNode parent = graph.nodes[static_cast<std::size_t>(j)];
        std::vector<std::string> ids{parent.id};
        std::string child_ids[2];
        for (int c = 0; c < 2; ++c) {
            const auto texts = unit_texts(*ctx.lecture, part[c]);
            kg::ConceptNode child = parent;
            child.id = out.graph.fresh_id(node_prefix(iteration));
            child.label = ctx.namer->name(texts);
            child.definition = definition_of(texts);
            child.rationale = "split of " + parent.id + " (column entropy " + text::format_sig9(h(j)) + ")";
            child_ids[c] = child.id;
            ids.push_back(child.id);
            out.graph.nodes.push_back(std::move(child));
        }
        std::vector<kg::RelationEdge> incident;
        for (const auto& e : out.graph.edges) {
            if (e.src == parent.id || e.dst == parent.id) incident.push_back(e);
        }
        for (const auto& cid : child_ids) {
            for (auto e : incident) {
                if (e.src == parent.id) e.src = cid;
                if (e.dst == parent.id) e.dst = cid;
                out.graph.add_edge(std::move(e));
            }
        }
        out.graph.remove_node(parent.id);
        out.edits.push_back(record("split", std::move(ids),
                                   "column entropy " + text::format_sig9(h(j)) + " over " +
                                       std::to_string(subset.size()) + " coupled units",
                                   iteration));
        ++done;
    }
    return out;
}

OpResult op_merge(const kg::KnowledgeGraph& graph, const ot::Coupling& pi, const embed::EmbeddingMatrix& node_embeddings,
                  const RefinementConfig& config, int iteration) {
    check_graph_matches(graph, pi);
    if (node_embeddings.rows() != pi.cols()) throw InputError("op_merge: embedding count mismatch");
    OpResult out{graph, {}};
    const std::size_t m = graph.nodes.size();
    std::vector<bool> used(m, false);
    int merges = 0;

    std::vector<std::vector<double>> dist(m);
    std::vector<bool> live(m, false);
    for (std::size_t j = 0; j < m; ++j) {
        if (pi.plan.col(static_cast<Eigen::Index>(j)).sum() > 0.0) {
            dist[j] = column_distribution(pi.plan, static_cast<Eigen::Index>(j));
            live[j] = true;
        }
    }

    for (std::size_t i = 0; i < m && merges < config.max_merges; ++i) {
        if (used[i] || !live[i]) continue;
        for (std::size_t j = i + 1; j < m && merges < config.max_merges; ++j) {
            if (used[i]) break;
            if (used[j] || !live[j]) continue;
            const double cos = embed::cosine_similarity(node_embeddings.row(static_cast<Eigen::Index>(i)),
                                                        node_embeddings.row(static_cast<Eigen::Index>(j)));
            if (cos < config.theta_cos) continue;
            const double kl = symmetric_kl(dist[i], dist[j], config.kl_smoothing);
            if (kl > config.theta_merge) continue;

            const auto& keep_id = graph.nodes[i].id;
            const auto& drop = graph.nodes[j];
            kg::ConceptNode* keep = out.graph.find(keep_id);
            auto absorb = [&](const std::string& name) {
                if (name.empty() || name == keep->label) return;
                if (std::find(keep->aliases.begin(), keep->aliases.end(), name) == keep->aliases.end()) {
                    keep->aliases.push_back(name);
                }
            };
            absorb(drop.label);
            for (const auto& al : drop.aliases) absorb(al);

            std::vector<kg::RelationEdge> moved;
            for (const auto& e : out.graph.edges) {
                if (e.src == drop.id || e.dst == drop.id) moved.push_back(e);
            }
            out.graph.remove_node(drop.id);
            for (auto e : moved) {
                if (e.src == drop.id) e.src = keep_id;
                if (e.dst == drop.id) e.dst = keep_id;
                out.graph.add_edge(std::move(e));  // drops self-loops and duplicates
            }
            used[i] = used[j] = true;
            ++merges;
            out.edits.push_back(record("merge", {keep_id, drop.id},
                                       "cosine " + text::format_sig9(cos) + ", symmetric KL " + text::format_sig9(kl),
                                       iteration));
        }
    }
    return out;
}

OpResult op_relate(const kg::KnowledgeGraph& graph, const lecture::LectureSpace& lecture, const ot::Coupling& pi,
                   const RefinementConfig& config, int iteration) {
    check_graph_matches(graph, pi);
    if (static_cast<std::size_t>(pi.rows()) != lecture.size()) throw InputError("op_relate: lecture size mismatch");
    OpResult out{graph, {}};
    const std::size_t m = graph.nodes.size();
    std::vector<std::vector<std::size_t>> top(m);
    for (std::size_t j = 0; j < m; ++j) top[j] = top_rows(pi.plan, static_cast<Eigen::Index>(j), kTopRows);

    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            const auto& ida = graph.nodes[a].id;
            const auto& idb = graph.nodes[b].id;
            if (out.graph.connected(ida, idb)) continue;
            double sum = 0.0;
            int count = 0;
            for (auto r1 : top[a]) {
                for (auto r2 : top[b]) {
                    if (r1 == r2) continue;
                    sum += lecture.d(static_cast<Eigen::Index>(r1), static_cast<Eigen::Index>(r2));
                    ++count;
                }
            }
            if (count == 0) continue;
            const double mean = sum / count;
            if (!(mean < config.theta_relate)) continue;
            kg::RelationEdge e;
            e.src = ida;
            e.dst = idb;
            e.relation = kg::kRelatedTo;
            e.confidence = kRelateConfidence;
            e.rationale = "coupled units lie close in the lecture (mean distance " + text::format_sig9(mean) + ")";
            const std::string eid = edge_id(e);
            const std::string why = *e.rationale;
            if (out.graph.add_edge(std::move(e))) out.edits.push_back(record("relate-add", {eid}, why, iteration));
        }
    }
    return out;
}

OpResult op_prune(const kg::KnowledgeGraph& graph, const ot::Coupling& pi, const RefinementConfig& config,
                  int iteration) {
    check_graph_matches(graph, pi);
    OpResult out{graph, {}};
    out.graph.edges.clear();
    for (const auto& e : graph.edges) {
        const double s = edge_support(pi, graph, e);
        if (s < config.tau) {
            out.edits.push_back(record("prune", {edge_id(e)}, "coupling support " + text::format_sig9(s), iteration));
        } else {
            out.graph.edges.push_back(e);
        }
    }
    return out;
}

OpResult llm_propose_edges(const kg::KnowledgeGraph& graph, llm::LlmClient* client,
                           const kg::RelationOntology& ontology, int iteration) {
    OpResult out{graph, {}};
    if (client == nullptr) return out;
    for (auto& e : llm::propose_graph_edges(graph, client, ontology)) {
        const std::string eid = edge_id(e);
        const std::string why = e.rationale.value_or("");
        if (out.graph.add_edge(std::move(e))) out.edits.push_back(record("llm-edge", {eid}, why, iteration));
    }
    return out;
}

}  // namespace rdkg::refine
