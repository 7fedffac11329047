#include "rdkg/errors.hpp"
#include "rdkg/log.hpp"
#include "rdkg/refinement.hpp"

#include <cmath>

namespace rdkg::refine {

Alignment align(const kg::KnowledgeGraph& graph, const Context& ctx) {
    if (ctx.lecture == nullptr || ctx.lecture_embeddings == nullptr || ctx.provider == nullptr) {
        throw InputError("align: incomplete context");
    }
    Alignment a;
    const auto texts = kg::node_texts(graph);
    if (texts.empty()) throw InputError("knowledge graph has no nodes");
    a.node_embeddings = ctx.provider->embed(texts);
    a.space = kg::build_kg_space(graph, a.node_embeddings, ctx.gamma, ctx.measure);
    a.feat = embed::feature_cost(*ctx.lecture_embeddings, a.node_embeddings);
    a.fgw = ot::fgw(ctx.lecture->d, a.space.d, a.feat, ctx.lecture->mu, a.space.mu, ctx.solver);
    a.rate = kg::rate(graph);
    a.coverage = analysis::coverage(a.feat, a.fgw.coupling.plan, ctx.config.tolerance_mode);
    return a;
}

RdPoint make_point(int t, const Alignment& a, double beta, std::vector<EditRecord> edits) {
    RdPoint p;
    p.t = t;
    p.rate = a.rate;
    p.distortion = a.fgw.distortion;
    p.structure = a.fgw.structure_term;
    p.feature = a.fgw.feature_term;
    p.objective = a.rate + beta * a.fgw.distortion;
    p.edits = std::move(edits);
    return p;
}

RefineOutcome refine(const kg::KnowledgeGraph& initial, const Context& ctx) {
    ctx.config.validate();
    ctx.solver.validate();
    const double beta = ctx.config.beta;

    RefineOutcome out;
    out.initial = align(initial, ctx);
    out.best = initial;
    out.best_alignment = out.initial;
    out.trace.beta = beta;
    out.trace.points.push_back(make_point(0, out.initial, beta));

    kg::KnowledgeGraph graph = initial;
    Alignment cur = out.initial;
    int stable = 0;

    for (int t = 1; t <= ctx.config.max_iterations; ++t) {
        std::vector<EditRecord> edits;
        try {
            auto apply = [&](OpResult r) {
                if (r.edits.empty()) return;
                graph = std::move(r.graph);
                for (auto& e : r.edits) edits.push_back(std::move(e));
                cur = align(graph, ctx);
            };
            apply(op_add(graph, cur, ctx, t));
            apply(op_split(graph, cur, ctx, t));
            apply(op_merge(graph, cur.coupling(), cur.node_embeddings, ctx.config, t));
            apply(op_relate(graph, *ctx.lecture, cur.coupling(), ctx.config, t));
            apply(op_prune(graph, cur.coupling(), ctx.config, t));
            apply(llm_propose_edges(graph, ctx.client, ctx.ontology, t));
        } catch (const NumericalError& e) {
            out.failure = "iteration " + std::to_string(t) + ": " + e.what();
            out.trace.complete = false;
            log::warn("refinement aborted at " + *out.failure);
            break;
        }

        out.trace.points.push_back(make_point(t, cur, beta, std::move(edits)));
        const auto& now = out.trace.points.back();
        const auto& prev = out.trace.points[out.trace.points.size() - 2];
        if (now.objective < out.trace.points[out.incumbent].objective) {
            out.incumbent = out.trace.points.size() - 1;
            out.best = graph;
            out.best_alignment = cur;
        }
        if (std::abs(now.objective - prev.objective) < ctx.config.conv_threshold) {
            if (++stable >= ctx.config.patience) break;
        } else {
            stable = 0;
        }
    }
    return out;
}

}  // namespace rdkg::refine
