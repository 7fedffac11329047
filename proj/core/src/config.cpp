#include "rdkg/errors.hpp"
#include "rdkg/pipeline.hpp"
#include "rdkg/text.hpp"

#include <charconv>
#include <functional>
#include <sstream>

namespace rdkg::pipeline {

namespace {

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw InputError("config: " + key + " expects a number, got '" + v + "'");
}

long long to_int(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) throw InputError("config: " + key + " expects an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw InputError("config: " + key + " expects a boolean, got '" + v + "'");
}

std::vector<std::string> to_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = text::trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

#define RDKG_REAL(name, field) {name, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_double(k, v); }}
#define RDKG_INT(name, field) {name, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = static_cast<decltype(c.field)>(to_int(k, v)); }}
#define RDKG_BOOL(name, field) {name, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_bool(k, v); }}
#define RDKG_STR(name, field) {name, [](RunConfig& c, const std::string&, const std::string& v) { c.field = v; }}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        RDKG_REAL("alpha_chron", alpha.chron),
        RDKG_REAL("alpha_logic", alpha.logic),
        RDKG_REAL("alpha_sem", alpha.sem),
        RDKG_REAL("gamma_struct", gamma.structure),
        RDKG_REAL("gamma_sem", gamma.sem),
        {"node_measure",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v == "uniform") c.measure = kg::NodeMeasure::Uniform;
             else if (v == "degree") c.measure = kg::NodeMeasure::Degree;
             else throw InputError("config: " + k + " expects uniform|degree, got '" + v + "'");
         }},
        RDKG_REAL("lambda_feat", solver.lambda_feat),
        RDKG_REAL("epsilon", solver.epsilon),
        RDKG_INT("sinkhorn_iters", solver.sinkhorn_iters),
        RDKG_INT("fw_iters", solver.fw_iters),
        RDKG_REAL("fw_tol", solver.fw_tol),
        RDKG_REAL("sinkhorn_tol", solver.sinkhorn_tol),
        RDKG_REAL("beta", refinement.beta),
        RDKG_REAL("theta_add", refinement.theta_add),
        RDKG_REAL("theta_split", refinement.theta_split),
        RDKG_REAL("theta_merge", refinement.theta_merge),
        RDKG_REAL("theta_cos", refinement.theta_cos),
        RDKG_REAL("theta_relate", refinement.theta_relate),
        RDKG_REAL("tau", refinement.tau),
        RDKG_INT("max_adds", refinement.max_adds),
        RDKG_INT("max_splits", refinement.max_splits),
        RDKG_INT("max_merges", refinement.max_merges),
        RDKG_INT("max_iterations", refinement.max_iterations),
        RDKG_REAL("conv_threshold", refinement.conv_threshold),
        RDKG_INT("patience", refinement.patience),
        RDKG_REAL("kl_smoothing", refinement.kl_smoothing),
        RDKG_BOOL("fractional_add", refinement.fractional_add),
        RDKG_BOOL("raw_entropy", refinement.raw_entropy),
        {"coverage_mode",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v == "all") c.refinement.tolerance_mode = analysis::ToleranceMode::AllEntries;
             else if (v == "row_minima") c.refinement.tolerance_mode = analysis::ToleranceMode::RowMinima;
             else throw InputError("config: " + k + " expects all|row_minima, got '" + v + "'");
         }},
        {"embedding_provider",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v == "hash") c.provider.kind = embed::ProviderKind::Hash;
             else if (v == "file") c.provider.kind = embed::ProviderKind::PrecomputedFile;
             else if (v == "http") c.provider.kind = embed::ProviderKind::Http;
             else throw InputError("config: " + k + " expects hash|file|http, got '" + v + "'");
         }},
        RDKG_INT("embedding_dim", provider.dim),
        RDKG_INT("embedding_seed", provider.seed),
        {"embeddings_file", [](RunConfig& c, const std::string&, const std::string& v) { c.provider.file = v; }},
        RDKG_STR("embedding_url", provider.http.base_url),
        RDKG_STR("embedding_model", provider.http.model),
        RDKG_REAL("embedding_timeout", provider.http.timeout_seconds),
        RDKG_INT("embedding_retries", provider.http.retries),
        RDKG_INT("embedding_batch", provider.http.batch_size),
        RDKG_STR("embedding_api_key_env", provider.http.api_key_env),
        RDKG_STR("llm_url", llm_url),
        RDKG_STR("llm_model", llm_model),
        RDKG_REAL("llm_timeout", llm_timeout),
        RDKG_INT("llm_retries", llm_retries),
        RDKG_REAL("llm_temperature", llm_temperature),
        {"extra_relations",
         [](RunConfig& c, const std::string&, const std::string& v) { c.extra_relations = to_list(v); }},
        RDKG_BOOL("dump_coupling", dump_coupling),
        RDKG_BOOL("debug", debug),
    };
    return table;
}

#undef RDKG_REAL
#undef RDKG_INT
#undef RDKG_BOOL
#undef RDKG_STR

std::string json_scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::vector<std::string> parts;
        for (const auto& x : v) parts.push_back(json_scalar(x));
        return text::join(parts, ",");
    }
    if (v.is_number_float()) {
        std::ostringstream os;
        os.precision(17);
        os << v.get<double>();
        return os.str();
    }
    return v.dump();
}

}  // namespace

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, _] : setters()) k.push_back(name);
        return k;
    }();
    return keys;
}

Settings load_settings_file(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    Settings out;
    const std::string trimmed = text::trim(content);
    if (!trimmed.empty() && trimmed.front() == '{') {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(trimmed);
        } catch (const nlohmann::json::exception& e) {
            throw InputError(path.string() + ": " + e.what());
        }
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            if (it->is_object() || it->is_null()) throw InputError(path.string() + ": " + it.key() + " must be a scalar");
            out[it.key()] = json_scalar(*it);
        }
        return out;
    }
    std::stringstream ss(content);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = text::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InputError(path.string() + ": line " + std::to_string(lineno) + ": expected key = value");
        }
        std::string value = text::trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        out[text::trim(line.substr(0, eq))] = value;
    }
    return out;
}

void apply_settings(RunConfig& config, const Settings& settings) {
    const auto& table = setters();
    for (const auto& [key, value] : settings) {
        const auto it = table.find(key);
        if (it == table.end()) throw InputError("config: unknown key '" + key + "'");
        it->second(config, key, value);
    }
}

void RunConfig::validate() const {
    const double a = alpha.chron + alpha.logic + alpha.sem;
    if (alpha.chron < 0 || alpha.logic < 0 || alpha.sem < 0 || std::abs(a - 1.0) > 1e-9) {
        throw InputError("invalid weights: alpha");
    }
    const double g = gamma.structure + gamma.sem;
    if (gamma.structure < 0 || gamma.sem < 0 || std::abs(g - 1.0) > 1e-9) throw InputError("invalid weights: gamma");
    solver.validate();
    refinement.validate();
    if (provider.kind == embed::ProviderKind::PrecomputedFile && provider.file.empty()) {
        throw InputError("embedding_provider=file requires embeddings_file");
    }
    if (provider.kind == embed::ProviderKind::Http && provider.http.base_url.empty()) {
        throw InputError("embedding_provider=http requires embedding_url");
    }
    if (provider.kind == embed::ProviderKind::Hash && provider.dim == 0) throw InputError("embedding_dim must be > 0");
    if (!llm_url.empty()) {
        if (!(llm_timeout > 0.0)) throw InputError("llm_timeout must be > 0");
        if (llm_retries < 0) throw InputError("llm_retries must be >= 0");
    }
}

nlohmann::json RunConfig::effective() const {
    nlohmann::json j;
    j["alpha_chron"] = alpha.chron;
    j["alpha_logic"] = alpha.logic;
    j["alpha_sem"] = alpha.sem;
    j["gamma_struct"] = gamma.structure;
    j["gamma_sem"] = gamma.sem;
    j["node_measure"] = measure == kg::NodeMeasure::Uniform ? "uniform" : "degree";
    j["lambda_feat"] = solver.lambda_feat;
    j["epsilon"] = solver.epsilon;
    j["sinkhorn_iters"] = solver.sinkhorn_iters;
    j["fw_iters"] = solver.fw_iters;
    j["fw_tol"] = solver.fw_tol;
    j["sinkhorn_tol"] = solver.sinkhorn_tol;
    const auto& r = refinement;
    j["beta"] = r.beta;
    j["theta_add"] = r.theta_add;
    j["theta_split"] = r.theta_split;
    j["theta_merge"] = r.theta_merge;
    j["theta_cos"] = r.theta_cos;
    j["theta_relate"] = r.theta_relate;
    j["tau"] = r.tau;
    j["max_adds"] = r.max_adds;
    j["max_splits"] = r.max_splits;
    j["max_merges"] = r.max_merges;
    j["max_iterations"] = r.max_iterations;
    j["conv_threshold"] = r.conv_threshold;
    j["patience"] = r.patience;
    j["kl_smoothing"] = r.kl_smoothing;
    j["fractional_add"] = r.fractional_add;
    j["raw_entropy"] = r.raw_entropy;
    j["coverage_mode"] = r.tolerance_mode == analysis::ToleranceMode::AllEntries ? "all" : "row_minima";
    switch (provider.kind) {
        case embed::ProviderKind::Hash:
            j["embedding_provider"] = "hash";
            j["embedding_dim"] = provider.dim;
            j["embedding_seed"] = provider.seed;
            break;
        case embed::ProviderKind::PrecomputedFile:
            j["embedding_provider"] = "file";
            j["embeddings_file"] = provider.file.generic_string();
            break;
        case embed::ProviderKind::Http:
            j["embedding_provider"] = "http";
            j["embedding_url"] = provider.http.base_url;
            j["embedding_model"] = provider.http.model;
            j["embedding_timeout"] = provider.http.timeout_seconds;
            j["embedding_retries"] = provider.http.retries;
            j["embedding_batch"] = provider.http.batch_size;
            break;
    }
    if (!llm_url.empty()) {
        j["llm_url"] = llm_url;
        j["llm_model"] = llm_model;
        j["llm_timeout"] = llm_timeout;
        j["llm_retries"] = llm_retries;
        j["llm_temperature"] = llm_temperature;
    }
    j["extra_relations"] = extra_relations;
    return j;
}

}  // namespace rdkg::pipeline
