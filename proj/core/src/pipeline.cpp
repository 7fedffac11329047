#include "rdkg/analysis.hpp"
#include "rdkg/errors.hpp"
#include "rdkg/log.hpp"
#include "rdkg/pipeline.hpp"
#include "rdkg/text.hpp"

#include <fstream>
#include <sstream>

namespace rdkg::pipeline {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path.string() + ": file not found");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw InputError("cannot create " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << content;
    if (!out) throw InputError("failed writing " + path.string());
}

std::unique_ptr<llm::LlmClient> make_llm_client(const RunConfig& config) {
    if (config.llm_url.empty()) return nullptr;
    llm::LlmClientConfig c;
    c.base_url = config.llm_url;
    c.model = config.llm_model;
    c.timeout_seconds = config.llm_timeout;
    c.retries = config.llm_retries;
    c.temperature = config.llm_temperature;
    if (config.debug) c.debug_dir = config.out_dir / "debug";
    return std::make_unique<llm::HttpLlmClient>(c);
}

namespace {

std::string offdiag_stats(const Matrix& d) {
    const Eigen::Index n = d.rows();
    if (n < 2) return "min=0 mean=0 max=0";
    double lo = d(0, 1);
    double hi = d(0, 1);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            lo = std::min(lo, d(i, j));
            hi = std::max(hi, d(i, j));
            sum += d(i, j);
        }
    }
    const double mean = sum / static_cast<double>(n * (n - 1));
    return "min=" + text::format_sig9(lo) + " mean=" + text::format_sig9(mean) + " max=" + text::format_sig9(hi);
}

lecture::LectureSpace load_lecture(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    try {
        return lecture::lecture_space_from_json(doc);
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

kg::KnowledgeGraph load_valid_kg(const std::filesystem::path& path, const kg::RelationOntology& ontology) {
    kg::KnowledgeGraph g;
    try {
        g = kg::load_kg(path);
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    const auto violations = kg::validate_graph(g, ontology);
    if (!violations.empty()) {
        std::string msg = path.string() + ": invalid knowledge graph";
        for (const auto& v : violations) msg += "\n  " + v.message;
        throw InputError(msg);
    }
    if (g.nodes.empty()) throw InputError(path.string() + ": knowledge graph has no nodes");
    return g;
}

std::size_t knee_or_first(const RdTrace& trace) {
    return trace.points.size() < 2 ? 0 : analysis::knee_point(trace.points);
}

/// Provider, lecture embeddings and namer kept alive for one command.
struct Session {
    std::unique_ptr<embed::EmbeddingProvider> base;
    std::unique_ptr<embed::CachingProvider> provider;
    std::unique_ptr<llm::LlmClient> client;
    lecture::LectureSpace lecture;
    embed::EmbeddingMatrix lecture_embeddings;
    std::unique_ptr<llm::ConceptNamer> namer;
    refine::Context ctx;

    Session(lecture::LectureSpace space, const RunConfig& config) : lecture(std::move(space)) {
        base = embed::make_provider(config.provider);
        provider = std::make_unique<embed::CachingProvider>(*base);
        client = make_llm_client(config);
        const auto texts = lecture.texts();
        lecture_embeddings = provider->embed(texts);
        namer = std::make_unique<llm::ConceptNamer>(texts, client.get());
        ctx.lecture = &lecture;
        ctx.lecture_embeddings = &lecture_embeddings;
        ctx.provider = provider.get();
        ctx.namer = namer.get();
        ctx.client = client.get();
        ctx.ontology = kg::RelationOntology(config.extra_relations);
        ctx.solver = config.solver;
        ctx.gamma = config.gamma;
        ctx.measure = config.measure;
        ctx.config = config.refinement;
    }
};

}  // namespace

lecture::LectureSpace cmd_ingest(const std::filesystem::path& markdown, const RunConfig& config, std::ostream& out) {
    config.validate();
    const std::string md = read_file(markdown);
    const auto provider = embed::make_provider(config.provider);
    lecture::LectureSpace space;
    try {
        space = lecture::lecture_space_from_markdown(md, *provider, config.alpha);
    } catch (const InputError& e) {
        throw InputError(markdown.string() + ": " + e.what());
    }
    write_file(config.out_dir / "lecture_space.json", lecture::to_json(space).dump(2) + "\n");
    out << "elements: " << space.size() << '\n' << "d: " << offdiag_stats(space.d) << '\n';
    return space;
}

kg::KnowledgeGraph cmd_bootstrap(const std::filesystem::path& markdown, const RunConfig& config, std::ostream& out) {
    config.validate();
    const std::string md = read_file(markdown);
    const auto client = make_llm_client(config);
    kg::KnowledgeGraph g;
    try {
        g = llm::bootstrap_kg(md, client.get(), kg::RelationOntology(config.extra_relations));
    } catch (const InputError& e) {
        throw InputError(markdown.string() + ": " + e.what());
    }
    write_file(config.out_dir / "kg.json", kg::dump_kg(g));
    out << "nodes: " << g.nodes.size() << '\n'
        << "edges: " << g.edges.size() << '\n'
        << "rate: " << text::format_sig9(kg::rate(g)) << '\n';
    return g;
}

refine::Alignment cmd_align(const std::filesystem::path& lecture_artifact, const std::filesystem::path& kg_file,
                            const RunConfig& config, std::ostream& out) {
    config.validate();
    Session s(load_lecture(lecture_artifact), config);
    const auto g = load_valid_kg(kg_file, s.ctx.ontology);
    auto a = refine::align(g, s.ctx);
    const double l = a.rate + config.refinement.beta * a.fgw.distortion;
    out << "distortion: " << text::format_sig9(a.fgw.distortion) << '\n'
        << "structure: " << text::format_sig9(a.fgw.structure_term) << '\n'
        << "feature: " << text::format_sig9(a.fgw.feature_term) << '\n'
        << "rate: " << text::format_sig9(a.rate) << '\n'
        << "objective: " << text::format_sig9(l) << '\n'
        << "coverage: " << text::format_sig9(a.coverage) << '\n'
        << "outer_iterations: " << a.fgw.outer_iterations << '\n';
    if (config.dump_coupling) {
        write_file(config.out_dir / "coupling.json", ot::coupling_to_json(a.coupling()).dump(2) + "\n");
    }
    return a;
}

int cmd_refine(const std::filesystem::path& lecture_artifact, const std::filesystem::path& kg_file,
               const RunConfig& config, std::ostream& out) {
    config.validate();
    Session s(load_lecture(lecture_artifact), config);
    const auto g = load_valid_kg(kg_file, s.ctx.ontology);
    const auto result = refine::refine(g, s.ctx);

    const auto& trace = result.trace;
    const std::size_t knee = knee_or_first(trace);
    auto report = analysis::report_json(trace, result.initial.coverage, result.best_alignment.coverage, knee,
                                        config.effective());
    report["incumbent_t"] = trace.points[result.incumbent].t;
    report["nodes_before"] = g.nodes.size();
    report["nodes_after"] = result.best.nodes.size();
    if (result.failure) report["failure"] = *result.failure;

    write_file(config.out_dir / "refined_kg.json", kg::dump_kg(result.best));
    write_file(config.out_dir / "trace.jsonl", to_jsonl(trace));
    write_file(config.out_dir / "rd_curve.csv", analysis::rd_curve_csv(trace));
    write_file(config.out_dir / "report.json", report.dump(2) + "\n");
    write_file(config.out_dir / "plot_data.json", analysis::plot_data(trace, knee).dump(2) + "\n");
    if (config.dump_coupling) {
        write_file(config.out_dir / "coupling.json",
                   ot::coupling_to_json(result.best_alignment.coupling()).dump(2) + "\n");
    }

    const auto& best = trace.points[result.incumbent];
    out << "iterations: " << trace.points.size() - 1 << '\n'
        << "incumbent: t=" << best.t << " rate=" << text::format_sig9(best.rate)
        << " distortion=" << text::format_sig9(best.distortion) << " objective=" << text::format_sig9(best.objective)
        << '\n'
        << "coverage: " << text::format_sig9(result.initial.coverage) << " -> "
        << text::format_sig9(result.best_alignment.coverage) << '\n'
        << "knee: t=" << trace.points[knee].t << '\n';
    if (result.failure) {
        out << "trace incomplete: " << *result.failure << '\n';
        return 3;
    }
    return 0;
}

void cmd_report(const std::filesystem::path& trace_file, const RunConfig& config, std::ostream& out) {
    config.validate();
    RdTrace trace;
    try {
        trace = trace_from_jsonl(read_file(trace_file), config.refinement.beta);
    } catch (const InputError& e) {
        throw InputError(trace_file.string() + ": " + e.what());
    }
    const std::size_t knee = knee_or_first(trace);
    analysis::emit_report(trace, std::nullopt, std::nullopt, knee, config.effective(), config.out_dir);
    out << "points: " << trace.points.size() << '\n' << "knee: t=" << trace.points[knee].t << '\n';
}

}  // namespace rdkg::pipeline
