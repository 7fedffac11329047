#pragma once

#include "rdkg/analysis.hpp"
#include "rdkg/embeddings.hpp"
#include "rdkg/knowledge_graph.hpp"
#include "rdkg/lecture_space.hpp"
#include "rdkg/llm.hpp"
#include "rdkg/ot.hpp"
#include "rdkg/trace.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rdkg::refine {

struct RefinementConfig {
    double beta = 100.0;
    double theta_add = 0.02;
    double theta_split = 0.35;
    double theta_merge = 0.12;
    double theta_cos = 0.90;
    double theta_relate = 0.25;
    double tau = 1e-4;
    int max_adds = 5;
    int max_splits = 3;
    int max_merges = 3;
    int max_iterations = 12;
    double conv_threshold = 0.25;
    int patience = 2;
    double kl_smoothing = 1e-9;
    /// Compare theta_add against covered mass divided by the row's mass.
    bool fractional_add = false;
    /// Compare theta_split against entropy in nats instead of entropy / ln N.
    bool raw_entropy = false;
    analysis::ToleranceMode tolerance_mode = analysis::ToleranceMode::AllEntries;

    void validate() const;
};

/// rho'_i = sum_j pi_ij * [feat_ij <= tol]
Vector covered_row_mass(const ot::Coupling& pi, const Matrix& feat, double tol);

/// Entropy of each column renormalized to a distribution; zero columns give 0.
/// Normalized by ln N unless raw (N = 1 gives 0 either way when normalized).
Vector column_entropy(const ot::Coupling& pi, bool normalized = true);

/// 0.5 * (KL(p||q) + KL(q||p)) after adding `smoothing` to every entry and
/// renormalizing. Throws InputError on a length mismatch.
double symmetric_kl(std::span<const double> p, std::span<const double> q, double smoothing = 1e-9);

/// Product of the coupling column masses of the edge's endpoints. Throws
/// InputError when an endpoint is not a node of the graph.
double edge_support(const ot::Coupling& pi, const kg::KnowledgeGraph& graph, const kg::RelationEdge& edge);

/// Up to k rows with the largest entries in column j; lower rows win ties.
std::vector<std::size_t> top_rows(const Matrix& plan, Eigen::Index j, std::size_t k);

struct TwoMeans {
    std::vector<int> labels;  // 0 or 1 per input row
    int iterations = 0;
};

/// 2-means on L2-normalized rows (so Euclidean matches cosine geometry).
/// Seeds are the farthest pair under cosine distance, lowest indices first;
/// an emptied cluster takes the point farthest from the other centroid.
TwoMeans two_means(const embed::EmbeddingMatrix& rows, int max_iters = 25);

/// Everything derived from aligning one graph to the lecture.
struct Alignment {
    kg::KgSpace space;
    embed::EmbeddingMatrix node_embeddings;
    Matrix feat;
    ot::FgwResult fgw;
    double rate = 0.0;
    double coverage = 0.0;

    const ot::Coupling& coupling() const { return fgw.coupling; }
};

/// Shared inputs for the operators and the search loop.
struct Context {
    const lecture::LectureSpace* lecture = nullptr;
    const embed::EmbeddingMatrix* lecture_embeddings = nullptr;  // rows follow lecture->elements
    const embed::EmbeddingProvider* provider = nullptr;
    const llm::ConceptNamer* namer = nullptr;
    llm::LlmClient* client = nullptr;
    kg::RelationOntology ontology;
    ot::SolverConfig solver;
    kg::KgWeights gamma;
    kg::NodeMeasure measure = kg::NodeMeasure::Uniform;
    RefinementConfig config;
};

/// Embeds node texts, builds the KG space and solves FGW. Throws
/// NumericalError on solver failure.
Alignment align(const kg::KnowledgeGraph& graph, const Context& ctx);

struct OpResult {
    kg::KnowledgeGraph graph;
    std::vector<EditRecord> edits;
};

OpResult op_add(const kg::KnowledgeGraph& graph, const Alignment& a, const Context& ctx, int iteration);
OpResult op_split(const kg::KnowledgeGraph& graph, const Alignment& a, const Context& ctx, int iteration);
OpResult op_merge(const kg::KnowledgeGraph& graph, const ot::Coupling& pi, const embed::EmbeddingMatrix& node_embeddings,
                  const RefinementConfig& config, int iteration);
OpResult op_relate(const kg::KnowledgeGraph& graph, const lecture::LectureSpace& lecture, const ot::Coupling& pi,
                   const RefinementConfig& config, int iteration);
OpResult op_prune(const kg::KnowledgeGraph& graph, const ot::Coupling& pi, const RefinementConfig& config,
                  int iteration);
/// No-op without a client; a failing client only logs a warning.
OpResult llm_propose_edges(const kg::KnowledgeGraph& graph, llm::LlmClient* client,
                           const kg::RelationOntology& ontology, int iteration);

struct RefineOutcome {
    kg::KnowledgeGraph best;
    RdTrace trace;
    std::size_t incumbent = 0;  // index into trace.points
    Alignment initial;
    Alignment best_alignment;
    std::optional<std::string> failure;  // set when a solve failed mid-run
};

RdPoint make_point(int t, const Alignment& a, double beta, std::vector<EditRecord> edits = {});

/// Bounded local search minimizing rate + beta * distortion. Throws
/// NumericalError if the initial graph cannot be aligned.
RefineOutcome refine(const kg::KnowledgeGraph& initial, const Context& ctx);

}  // namespace rdkg::refine
