#include "testkit.hpp"

#include "rdkg/refinement.hpp"

#include <gtest/gtest.h>

using namespace rdkg;
using namespace rdkg::refine;

namespace {

std::unique_ptr<testkit::Scenario> two_topic() {
    return testkit::make_scenario(testkit::read_text(testkit::data_dir() / "two_topic.md"));
}

}  // namespace

TEST(Refine, TraceShapeAndIncumbent) {
    auto s = two_topic();
    const auto out = refine::refine(testkit::impoverished_kg(), s->ctx);
    const auto& pts = out.trace.points;
    ASSERT_GE(pts.size(), 1u);
    EXPECT_LE(pts.size(), static_cast<std::size_t>(s->ctx.config.max_iterations) + 1);
    EXPECT_TRUE(out.trace.complete);
    EXPECT_FALSE(out.failure);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        EXPECT_EQ(pts[k].t, static_cast<int>(k));
        EXPECT_NEAR(pts[k].objective, pts[k].rate + s->ctx.config.beta * pts[k].distortion, 1e-9);
        EXPECT_GE(pts[k].objective, pts[out.incumbent].objective);
    }
    // The incumbent is the earliest strict minimum.
    for (std::size_t k = 0; k < out.incumbent; ++k) EXPECT_GT(pts[k].objective, pts[out.incumbent].objective);
    EXPECT_DOUBLE_EQ(kg::rate(out.best), pts[out.incumbent].rate);
    EXPECT_TRUE(kg::validate_graph(out.best).empty());
    EXPECT_GT(out.best_alignment.coverage, out.initial.coverage);
}

TEST(Refine, ZeroIterationsReturnsInitialPointOnly) {
    auto s = two_topic();
    s->ctx.config.max_iterations = 0;
    const auto g = testkit::impoverished_kg();
    const auto out = refine::refine(g, s->ctx);
    ASSERT_EQ(out.trace.points.size(), 1u);
    EXPECT_EQ(out.best, g);
    EXPECT_EQ(out.incumbent, 0u);
    EXPECT_TRUE(out.trace.points[0].edits.empty());
}

TEST(Refine, Deterministic) {
    auto s1 = two_topic();
    auto s2 = two_topic();
    const auto a = refine::refine(testkit::impoverished_kg(), s1->ctx);
    const auto b = refine::refine(testkit::impoverished_kg(), s2->ctx);
    EXPECT_EQ(a.trace.points, b.trace.points);
    EXPECT_EQ(a.best, b.best);
    EXPECT_EQ(to_jsonl(a.trace), to_jsonl(b.trace));
}

TEST(Refine, StopsAfterPatienceQuietIterations) {
    auto s = testkit::make_scenario(testkit::duplicate_markdown());
    s->ctx.config.conv_threshold = 1e9;  // every change counts as small
    s->ctx.config.patience = 2;
    s->ctx.config.max_iterations = 12;
    const auto out = refine::refine(testkit::duplicate_kg(), s->ctx);
    EXPECT_EQ(out.trace.points.size(), 3u);

    s->ctx.config.patience = 1;
    EXPECT_EQ(refine::refine(testkit::duplicate_kg(), s->ctx).trace.points.size(), 2u);
}

TEST(Refine, EditsCarryTheirIteration) {
    auto s = two_topic();
    const auto out = refine::refine(testkit::impoverished_kg(), s->ctx);
    for (const auto& p : out.trace.points) {
        for (const auto& e : p.edits) EXPECT_EQ(e.iteration, p.t);
    }
    ASSERT_GE(out.trace.points.size(), 2u);
    EXPECT_FALSE(out.trace.points[1].edits.empty());
}

TEST(Refine, MergeRemovesDuplicate) {
    auto s = testkit::make_scenario(testkit::duplicate_markdown());
    const auto out = refine::refine(testkit::duplicate_kg(), s->ctx);
    EXPECT_EQ(out.best.find("queue_copy"), nullptr);
    EXPECT_LT(out.trace.points[out.incumbent].objective, out.trace.points[0].objective);
}

TEST(Refine, MakePointUsesBeta) {
    Alignment a;
    a.rate = 3.0;
    a.fgw.distortion = 0.25;
    a.fgw.structure_term = 0.1;
    a.fgw.feature_term = 0.4;
    const auto p = make_point(2, a, 8.0);
    EXPECT_EQ(p.t, 2);
    EXPECT_DOUBLE_EQ(p.objective, 5.0);
    EXPECT_DOUBLE_EQ(p.structure, 0.1);
}
