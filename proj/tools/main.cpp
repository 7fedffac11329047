#include "rdkg/errors.hpp"
#include "rdkg/log.hpp"
#include "rdkg/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>

namespace {

enum Exit { kOk = 0, kUsage = 1, kInput = 2, kNumerical = 3 };

std::string flag_name(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return "--" + key;
}

}  // namespace

int main(int argc, char** argv) {
    using rdkg::pipeline::RunConfig;

    CLI::App app{"Rate-distortion knowledge-graph refinement for lecture notes"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = ".";
    bool debug = false;
    bool quiet = false;
    app.add_option("--config", config_path, "Settings file (flat JSON or key = value lines)");
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_flag("--debug", debug, "Log LLM prompts under <out>/debug");
    app.add_flag("-q,--quiet", quiet, "Suppress warnings");

    // Every settings key is also a flag; CLI values beat the config file.
    rdkg::pipeline::Settings cli_settings;
    std::map<std::string, std::string> raw;
    for (const auto& key : rdkg::pipeline::known_keys()) {
        if (key == "debug") continue;
        app.add_option(flag_name(key), raw[key], "Setting " + key)->group("Settings");
    }

    std::string markdown;
    std::string lecture;
    std::string kg;
    std::string trace;

    auto* ingest = app.add_subcommand("ingest", "Markdown -> lecture_space.json");
    ingest->add_option("markdown", markdown, "Lecture notes")->required();
    auto* bootstrap = app.add_subcommand("bootstrap", "Markdown -> kg.json");
    bootstrap->add_option("markdown", markdown, "Lecture notes")->required();
    auto* align = app.add_subcommand("align", "Align a KG to a lecture space and print the distortion");
    align->add_option("lecture", lecture, "lecture_space.json")->required();
    align->add_option("kg", kg, "Knowledge graph JSON")->required();
    auto* refine = app.add_subcommand("refine", "Refine a KG and write the trace and reports");
    refine->add_option("lecture", lecture, "lecture_space.json")->required();
    refine->add_option("kg", kg, "Knowledge graph JSON")->required();
    auto* report = app.add_subcommand("report", "Rebuild report files from a trace");
    report->add_option("trace", trace, "trace.jsonl")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    rdkg::log::set_quiet(quiet);
    try {
        RunConfig config;
        if (!config_path.empty()) rdkg::pipeline::apply_settings(config, rdkg::pipeline::load_settings_file(config_path));
        for (const auto& [key, value] : raw) {
            if (app.count(flag_name(key)) > 0) cli_settings[key] = value;
        }
        rdkg::pipeline::apply_settings(config, cli_settings);
        config.out_dir = out_dir;
        if (debug) config.debug = true;

        if (*ingest) {
            rdkg::pipeline::cmd_ingest(markdown, config, std::cout);
        } else if (*bootstrap) {
            rdkg::pipeline::cmd_bootstrap(markdown, config, std::cout);
        } else if (*align) {
            rdkg::pipeline::cmd_align(lecture, kg, config, std::cout);
        } else if (*refine) {
            return rdkg::pipeline::cmd_refine(lecture, kg, config, std::cout);
        } else if (*report) {
            rdkg::pipeline::cmd_report(trace, config, std::cout);
        }
        return kOk;
    } catch (const rdkg::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInput;
    } catch (const rdkg::ProviderError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInput;
    } catch (const rdkg::NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
}
