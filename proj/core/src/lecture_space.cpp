#include "rdkg/lecture_space.hpp"

#include "rdkg/errors.hpp"
#include "rdkg/text.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace rdkg::lecture {

namespace {

constexpr std::size_t kMinUnitLength = 3;

void emit(const Section& s, std::vector<std::string>& path, std::vector<LectureElement>& out) {
    for (const auto& b : s.blocks) {
        std::string content = (b.kind == BlockKind::Code || b.kind == BlockKind::Math)
                                  ? text::trim(b.text)
                                  : text::normalize_whitespace(b.text);
        if (text::normalize_whitespace(content).size() < kMinUnitLength) continue;
        LectureElement e;
        e.idx = out.size();
        e.id = "u" + std::to_string(e.idx);
        e.section_path = path.empty() ? std::vector<std::string>{kRootTitle} : path;
        e.content = std::move(content);
        e.line_begin = b.line_begin;
        e.line_end = b.line_end;
        out.push_back(std::move(e));
    }
    for (const auto& c : s.children) {
        path.push_back(c.title);
        emit(c, path, out);
        path.pop_back();
    }
}

std::size_t common_prefix(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::size_t n = 0;
    while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
    return n;
}

void check_unit_matrix(const Matrix& m, Eigen::Index n, const char* what) {
    if (m.rows() != n || m.cols() != n) {
        throw InputError(std::string("lecture space: ") + what + " has wrong shape");
    }
    if (!is_unit_distance_matrix(m)) {
        throw InputError(std::string("lecture space: ") + what + " must be symmetric with zero diagonal and entries in [0,1]");
    }
}

}  // namespace

std::vector<LectureElement> flatten(const Section& root) {
    std::vector<LectureElement> out;
    std::vector<std::string> path;
    emit(root, path, out);
    if (out.empty()) throw InputError("no atomic units");
    return out;
}

Matrix chron_distance(std::span<const LectureElement> elements) {
    const auto n = static_cast<Eigen::Index>(elements.size());
    Matrix d = Matrix::Zero(n, n);
    std::size_t max_idx = 0;
    for (const auto& e : elements) max_idx = std::max(max_idx, e.idx);
    if (max_idx == 0) return d;
    const double scale = static_cast<double>(max_idx);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto a = static_cast<double>(elements[static_cast<std::size_t>(i)].idx);
            const auto b = static_cast<double>(elements[static_cast<std::size_t>(j)].idx);
            d(i, j) = std::abs(a - b) / scale;
        }
    }
    return d;
}

Matrix logic_distance(std::span<const LectureElement> elements) {
    const auto n = static_cast<Eigen::Index>(elements.size());
    std::size_t max_depth = 0;
    for (const auto& e : elements) max_depth = std::max(max_depth, e.section_path.size());
    Matrix d = Matrix::Zero(n, n);
    if (max_depth == 0) return d;
    const double depth = static_cast<double>(max_depth);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const auto lcp = common_prefix(elements[static_cast<std::size_t>(i)].section_path,
                                           elements[static_cast<std::size_t>(j)].section_path);
            const double v = 1.0 - static_cast<double>(lcp) / depth;
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

Matrix semantic_distance(const embed::EmbeddingMatrix& e) {
    return embed::pairwise_cosine_distance(e);
}

Matrix combine_lecture_distance(const Matrix& chron, const Matrix& logic, const Matrix& sem,
                                const LectureWeights& alpha) {
    const std::array<Matrix, 3> parts{chron, logic, sem};
    const std::array<double, 3> w{alpha.chron, alpha.logic, alpha.sem};
    return normalize_offdiag(fuse(parts, w));
}

Vector uniform_measure(std::size_t n) {
    if (n == 0) throw InputError("uniform_measure: n must be at least 1");
    return Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
}

std::vector<std::string> LectureSpace::texts() const {
    std::vector<std::string> out;
    out.reserve(elements.size());
    for (const auto& e : elements) out.push_back(e.content);
    return out;
}

LectureSpace build_lecture_space(std::vector<LectureElement> elements, const embed::EmbeddingMatrix& embeddings,
                                 const LectureWeights& alpha) {
    if (elements.empty()) throw InputError("no atomic units");
    if (embeddings.rows() != static_cast<Eigen::Index>(elements.size())) {
        throw InputError("lecture embeddings must have one row per element");
    }
    LectureSpace s;
    s.alpha = alpha;
    s.chron = normalize_offdiag(chron_distance(elements));
    s.logic = normalize_offdiag(logic_distance(elements));
    s.sem = normalize_offdiag(semantic_distance(embeddings));
    s.d = combine_lecture_distance(s.chron, s.logic, s.sem, alpha);
    s.mu = uniform_measure(elements.size());
    s.elements = std::move(elements);
    return s;
}

LectureSpace lecture_space_from_markdown(std::string_view markdown, const embed::EmbeddingProvider& provider,
                                         const LectureWeights& alpha) {
    auto elements = flatten(parse_markdown(markdown));
    std::vector<std::string> texts;
    texts.reserve(elements.size());
    for (const auto& e : elements) texts.push_back(e.content);
    return build_lecture_space(std::move(elements), provider.embed(texts), alpha);
}

nlohmann::json to_json(const LectureSpace& space) {
    nlohmann::json doc;
    doc["elements"] = nlohmann::json::array();
    for (const auto& e : space.elements) {
        doc["elements"].push_back({{"id", e.id},
                                   {"idx", e.idx},
                                   {"path", e.section_path},
                                   {"content", e.content},
                                   {"line_span", {e.line_begin, e.line_end}}});
    }
    doc["mu"] = vector_to_json(space.mu);
    doc["d"] = matrix_to_json(space.d);
    doc["components"] = {{"chron", matrix_to_json(space.chron)},
                         {"logic", matrix_to_json(space.logic)},
                         {"sem", matrix_to_json(space.sem)}};
    doc["alpha"] = {space.alpha.chron, space.alpha.logic, space.alpha.sem};
    return doc;
}

LectureSpace lecture_space_from_json(const nlohmann::json& doc) {
    try {
        LectureSpace s;
        for (const auto& je : doc.at("elements")) {
            LectureElement e;
            e.id = je.at("id").get<std::string>();
            e.idx = je.at("idx").get<std::size_t>();
            e.section_path = je.at("path").get<std::vector<std::string>>();
            e.content = je.at("content").get<std::string>();
            if (je.contains("line_span")) {
                e.line_begin = je["line_span"].at(0).get<int>();
                e.line_end = je["line_span"].at(1).get<int>();
            }
            s.elements.push_back(std::move(e));
        }
        if (s.elements.empty()) throw InputError("lecture space has no elements");
        for (std::size_t i = 0; i < s.elements.size(); ++i) {
            if (s.elements[i].idx != i) throw InputError("lecture space: element indices must be 0..N-1 in order");
            if (text::normalize_whitespace(s.elements[i].content).empty()) {
                throw InputError("lecture space: element " + s.elements[i].id + " has empty content");
            }
        }
        const auto n = static_cast<Eigen::Index>(s.elements.size());
        s.d = matrix_from_json(doc.at("d"));
        s.mu = vector_from_json(doc.at("mu"));
        s.chron = matrix_from_json(doc.at("components").at("chron"));
        s.logic = matrix_from_json(doc.at("components").at("logic"));
        s.sem = matrix_from_json(doc.at("components").at("sem"));
        const auto a = doc.at("alpha").get<std::vector<double>>();
        if (a.size() != 3) throw InputError("lecture space: alpha must have three entries");
        s.alpha = {a[0], a[1], a[2]};
        if (std::abs(a[0] + a[1] + a[2] - 1.0) > 1e-9) throw InputError("invalid weights");

        check_unit_matrix(s.d, n, "d");
        check_unit_matrix(s.chron, n, "components.chron");
        check_unit_matrix(s.logic, n, "components.logic");
        check_unit_matrix(s.sem, n, "components.sem");
        if (s.mu.size() != n || (s.mu.array() < 0.0).any() || std::abs(s.mu.sum() - 1.0) > 1e-9) {
            throw InputError("lecture space: mu must be a probability vector with one entry per element");
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed lecture space artifact: ") + e.what());
    }
}

}  // namespace rdkg::lecture
