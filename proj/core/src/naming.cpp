#include "rdkg/errors.hpp"
#include "rdkg/llm.hpp"
#include "rdkg/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace rdkg::llm {

ConceptNamer::ConceptNamer(const std::vector<std::string>& corpus, LlmClient* client)
    : n_units_(corpus.size()), client_(client) {
    for (const auto& unit : corpus) {
        const auto toks = text::tokenize(unit);
        for (const auto& t : std::set<std::string>(toks.begin(), toks.end())) ++df_[t];
    }
}

std::string ConceptNamer::tfidf_label(const std::vector<std::string>& texts) const {
    std::map<std::string, double> tf;
    for (const auto& t : texts) {
        for (auto& tok : text::tokenize(t)) {
            if (!text::is_stopword(tok)) tf[tok] += 1.0;
        }
    }
    if (tf.empty()) return "Concept " + text::sha256_hex(text::join(texts, "\n")).substr(0, 8);

    std::vector<std::pair<double, std::string>> scored;
    for (const auto& [term, count] : tf) {
        const auto it = df_.find(term);
        const double df = it == df_.end() ? 1.0 : static_cast<double>(it->second);
        scored.emplace_back(count * std::log(1.0 + static_cast<double>(n_units_) / df), term);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::string> words;
    for (std::size_t k = 0; k < std::min<std::size_t>(3, scored.size()); ++k) {
        std::string w = scored[k].second;
        w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
        words.push_back(std::move(w));
    }
    return text::join(words, " ");
}

std::string ConceptNamer::name(const std::vector<std::string>& texts) const {
    if (texts.empty()) throw InputError("name_concept: empty text list");
    if (client_ != nullptr) {
        const auto reply = client_->complete({{"system", prompts::kNamingSystem}, {"user", prompts::naming_user(texts)}});
        if (reply) {
            std::string label;
            if (const auto doc = extract_json_object(*reply); doc && doc->contains("label") && (*doc)["label"].is_string()) {
                label = (*doc)["label"].get<std::string>();
            } else if (!doc) {
                label = *reply;
            }
            label = text::normalize_whitespace(label);
            if (!label.empty()) return label;
        }
    }
    return tfidf_label(texts);
}

}  // namespace rdkg::llm
