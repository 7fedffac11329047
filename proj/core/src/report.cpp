#include "rdkg/analysis.hpp"
#include "rdkg/errors.hpp"
#include "rdkg/text.hpp"
#include "rdkg/trace.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace rdkg {

nlohmann::json to_json(const EditRecord& e) {
    return {{"op", e.op}, {"ids", e.ids}, {"rationale", e.rationale}, {"iteration", e.iteration}};
}

nlohmann::json to_json(const RdPoint& p) {
    nlohmann::json j;
    j["t"] = p.t;
    j["rate"] = p.rate;
    j["distortion"] = p.distortion;
    j["structure"] = p.structure;
    j["feature"] = p.feature;
    j["objective"] = p.objective;
    j["edits"] = nlohmann::json::array();
    for (const auto& e : p.edits) j["edits"].push_back(to_json(e));
    return j;
}

std::string to_jsonl(const RdTrace& trace) {
    std::string out;
    for (const auto& p : trace.points) {
        out += to_json(p).dump();
        out += '\n';
    }
    return out;
}

RdTrace trace_from_jsonl(std::string_view content, double beta) {
    RdTrace trace;
    trace.beta = beta;
    std::size_t start = 0;
    int lineno = 0;
    while (start < content.size()) {
        std::size_t end = content.find('\n', start);
        if (end == std::string_view::npos) end = content.size();
        const std::string line = text::trim(content.substr(start, end - start));
        start = end + 1;
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            RdPoint p;
            p.t = j.at("t").get<int>();
            p.rate = j.at("rate").get<double>();
            p.distortion = j.at("distortion").get<double>();
            p.structure = j.at("structure").get<double>();
            p.feature = j.at("feature").get<double>();
            p.objective = j.at("objective").get<double>();
            if (j.contains("edits")) {
                for (const auto& je : j["edits"]) {
                    EditRecord e;
                    e.op = je.at("op").get<std::string>();
                    e.ids = je.at("ids").get<std::vector<std::string>>();
                    e.rationale = je.value("rationale", "");
                    e.iteration = je.value("iteration", p.t);
                    p.edits.push_back(std::move(e));
                }
            }
            if (!trace.points.empty() && p.t <= trace.points.back().t) {
                throw InputError("records must be ordered by increasing t");
            }
            trace.points.push_back(std::move(p));
        } catch (const std::exception& e) {
            throw InputError("malformed trace at line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (trace.points.empty()) throw InputError("empty trace");
    return trace;
}

}  // namespace rdkg

namespace rdkg::analysis {

namespace {

void round_floats(nlohmann::json& j) {
    if (j.is_number_float()) {
        j = text::round_sig9(j.get<double>());
    } else if (j.is_array() || j.is_object()) {
        for (auto& v : j) round_floats(v);
    }
}

std::pair<std::vector<double>, std::vector<double>> normalized_axes(const RdTrace& trace) {
    std::vector<double> r;
    std::vector<double> d;
    for (const auto& p : trace.points) {
        r.push_back(p.rate);
        d.push_back(p.distortion);
    }
    auto norm = [](std::vector<double> v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        const double a = *lo;
        const double range = *hi - *lo;
        for (auto& x : v) x = range > 0.0 ? (x - a) / range : 0.0;
        return v;
    };
    return {norm(std::move(r)), norm(std::move(d))};
}

nlohmann::json point_summary(const RdPoint& p) {
    return {{"t", p.t},
            {"rate", p.rate},
            {"distortion", p.distortion},
            {"objective", p.objective},
            {"structure", p.structure},
            {"feature", p.feature}};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << content;
    if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace

std::string rd_curve_csv(const RdTrace& trace) {
    std::ostringstream os;
    os << "t,rate,distortion,objective,structure,feature\n";
    for (const auto& p : trace.points) {
        os << p.t << ',' << text::format_sig9(p.rate) << ',' << text::format_sig9(p.distortion) << ','
           << text::format_sig9(p.objective) << ',' << text::format_sig9(p.structure) << ','
           << text::format_sig9(p.feature) << '\n';
    }
    return os.str();
}

nlohmann::json plot_data(const RdTrace& trace, std::size_t knee) {
    const auto [x, y] = normalized_axes(trace);
    nlohmann::json j;
    j["beta"] = trace.beta;
    j["points"] = nlohmann::json::array();
    for (std::size_t i = 0; i < trace.points.size(); ++i) {
        auto p = point_summary(trace.points[i]);
        p["rate_norm"] = x[i];
        p["distortion_norm"] = y[i];
        j["points"].push_back(std::move(p));
    }
    j["knee_index"] = knee;
    j["chord"] = {{"from", {x.front(), y.front()}}, {"to", {x.back(), y.back()}}};
    // Iso-objective contours L = R + beta * D drawn as D = L / beta - R / beta.
    const double l_knee = trace.points.at(knee).objective;
    j["iso_objective"] = nlohmann::json::array();
    for (double offset : {-10.0, -5.0, 0.0, 5.0, 10.0}) {
        const double level = l_knee + offset;
        j["iso_objective"].push_back({{"offset", offset},
                                      {"objective", level},
                                      {"slope", -1.0 / trace.beta},
                                      {"intercept", level / trace.beta}});
    }
    round_floats(j);
    return j;
}

nlohmann::json report_json(const RdTrace& trace, std::optional<double> coverage_before,
                           std::optional<double> coverage_after, std::size_t knee, const nlohmann::json& config) {
    nlohmann::json j;
    j["knee_index"] = knee;
    j["knee_point"] = point_summary(trace.points.at(knee));
    j["coverage_before"] = coverage_before ? nlohmann::json(*coverage_before) : nlohmann::json(nullptr);
    j["coverage_after"] = coverage_after ? nlohmann::json(*coverage_after) : nlohmann::json(nullptr);
    j["beta"] = trace.beta;
    j["points"] = trace.points.size();
    j["trace_complete"] = trace.complete;
    j["knee_method"] = "max perpendicular distance to the first-last chord, both axes min-max normalized over the trace";
    j["config"] = config;
    round_floats(j);
    return j;
}

void emit_report(const RdTrace& trace, std::optional<double> coverage_before, std::optional<double> coverage_after,
                 std::size_t knee, const nlohmann::json& config, const std::filesystem::path& out_dir) {
    if (trace.points.empty()) throw InputError("empty trace");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw InputError("cannot create " + out_dir.string() + ": " + ec.message());
    write_file(out_dir / "rd_curve.csv", rd_curve_csv(trace));
    write_file(out_dir / "report.json", report_json(trace, coverage_before, coverage_after, knee, config).dump(2) + "\n");
    write_file(out_dir / "plot_data.json", plot_data(trace, knee).dump(2) + "\n");
}

}  // namespace rdkg::analysis
