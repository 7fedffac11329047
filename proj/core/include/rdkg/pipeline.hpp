#pragma once

#include "rdkg/embeddings.hpp"
#include "rdkg/knowledge_graph.hpp"
#include "rdkg/lecture_space.hpp"
#include "rdkg/llm.hpp"
#include "rdkg/ot.hpp"
#include "rdkg/refinement.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace rdkg::pipeline {

/// Flat key -> raw value settings, as read from a config file or CLI flags.
using Settings = std::map<std::string, std::string>;

struct RunConfig {
    std::filesystem::path out_dir = ".";
    lecture::LectureWeights alpha;
    kg::KgWeights gamma;
    kg::NodeMeasure measure = kg::NodeMeasure::Uniform;
    ot::SolverConfig solver;
    refine::RefinementConfig refinement;
    embed::ProviderSpec provider;
    std::string llm_url;  // empty: no LLM client
    std::string llm_model;
    double llm_timeout = 60.0;
    int llm_retries = 2;
    double llm_temperature = 0.0;
    std::vector<std::string> extra_relations;
    bool dump_coupling = false;
    bool debug = false;

    /// Throws InputError naming the first field that breaks its invariant.
    void validate() const;
    /// Every setting in effect, keyed as in config files.
    nlohmann::json effective() const;
};

/// Keys accepted by apply_settings, sorted.
const std::vector<std::string>& known_keys();

/// A flat JSON object, or "key = value" lines ('#' starts a comment).
/// Throws InputError("file not found") or a parse error with line context.
Settings load_settings_file(const std::filesystem::path& path);

/// Overwrites the matching fields. Unknown keys and unparsable values throw
/// InputError.
void apply_settings(RunConfig& config, const Settings& settings);

std::unique_ptr<llm::LlmClient> make_llm_client(const RunConfig& config);

/// Writes lecture_space.json. Returns the space.
lecture::LectureSpace cmd_ingest(const std::filesystem::path& markdown, const RunConfig& config, std::ostream& out);

/// Writes kg.json.
kg::KnowledgeGraph cmd_bootstrap(const std::filesystem::path& markdown, const RunConfig& config, std::ostream& out);

/// Prints the alignment summary; writes coupling.json when dump_coupling is set.
refine::Alignment cmd_align(const std::filesystem::path& lecture_artifact, const std::filesystem::path& kg_file,
                            const RunConfig& config, std::ostream& out);

/// Writes refined_kg.json, trace.jsonl, rd_curve.csv, report.json and
/// plot_data.json. Returns 0, or 3 when the trace is incomplete.
int cmd_refine(const std::filesystem::path& lecture_artifact, const std::filesystem::path& kg_file,
               const RunConfig& config, std::ostream& out);

/// Re-emits rd_curve.csv, report.json and plot_data.json from a trace file.
void cmd_report(const std::filesystem::path& trace_file, const RunConfig& config, std::ostream& out);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace rdkg::pipeline
