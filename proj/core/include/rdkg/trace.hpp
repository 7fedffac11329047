#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace rdkg {

/// Audit entry for one graph edit.
struct EditRecord {
    std::string op;  // add | split | merge | relate-add | prune | llm-edge
    std::vector<std::string> ids;
    std::string rationale;
    int iteration = 0;

    bool operator==(const EditRecord&) const = default;
};

struct RdPoint {
    int t = 0;
    double rate = 0.0;
    double distortion = 0.0;
    double structure = 0.0;
    double feature = 0.0;
    double objective = 0.0;  // rate + beta * distortion
    std::vector<EditRecord> edits;

    bool operator==(const RdPoint&) const = default;
};

struct RdTrace {
    double beta = 100.0;
    std::vector<RdPoint> points;
    bool complete = true;
};

nlohmann::json to_json(const EditRecord& e);
nlohmann::json to_json(const RdPoint& p);

/// One JSON object per line: { t, rate, distortion, structure, feature, objective, edits }.
std::string to_jsonl(const RdTrace& trace);

/// Parses JSON lines; blank lines are skipped. Throws InputError naming the
/// offending line, or when no records are present.
RdTrace trace_from_jsonl(std::string_view content, double beta);

}  // namespace rdkg
