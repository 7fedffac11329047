#pragma once

#include "rdkg/embeddings.hpp"
#include "rdkg/matrix.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rdkg::lecture {

inline constexpr const char* kRootTitle = "<root>";

enum class BlockKind { Paragraph, ListItem, Code, Math };

struct Block {
    BlockKind kind = BlockKind::Paragraph;
    std::string text;
    int line_begin = 0;  // 1-based, inclusive
    int line_end = 0;
};

/// One node of the heading tree. The root has level 0 and title "<root>" and
/// owns any blocks that appear before the first heading.
struct Section {
    std::string id;
    int level = 0;
    std::string title;
    int line = 0;
    std::vector<Block> blocks;
    std::vector<Section> children;
};

/// Parse #-style Markdown into a section tree. Paragraphs, list items,
/// fenced code and display math ($$ or \[ \]) become blocks. A heading that
/// skips levels is attached as a direct child of the nearest shallower
/// heading. Throws InputError("empty input") for blank documents.
Section parse_markdown(std::string_view markdown);

nlohmann::json section_to_json(const Section& s);

/// Number of headings in the tree (the root excluded).
std::size_t heading_count(const Section& root);

struct LectureElement {
    std::string id;
    std::size_t idx = 0;
    std::vector<std::string> section_path;
    std::string content;
    int line_begin = 0;
    int line_end = 0;

    bool operator==(const LectureElement&) const = default;
};

/// Depth-first, document-order emission of every block as an atomic unit.
/// Units shorter than 3 characters after whitespace normalization are
/// dropped before indices are assigned. Throws InputError("no atomic units").
std::vector<LectureElement> flatten(const Section& root);

/// |idx_i - idx_j| / max(idx). A single element yields the 1x1 zero matrix.
Matrix chron_distance(std::span<const LectureElement> elements);

/// 1 - LCP(path_i, path_j) / max_depth. The diagonal is 1 - |path_i| / max_depth.
Matrix logic_distance(std::span<const LectureElement> elements);

/// clip(1 - cos(E_i, E_j), 0, 2) with a zero diagonal; not normalized.
Matrix semantic_distance(const embed::EmbeddingMatrix& e);

struct LectureWeights {
    double chron = 0.2;
    double logic = 0.3;
    double sem = 0.5;
};

/// Convex combination of three [0,1] components followed by off-diagonal
/// min-max normalization; the diagonal is forced to zero.
/// Throws InputError("invalid weights") when alpha is not a convex weight.
Matrix combine_lecture_distance(const Matrix& chron, const Matrix& logic, const Matrix& sem,
                                const LectureWeights& alpha);

Vector uniform_measure(std::size_t n);

/// Source metric-measure space over the lecture's atomic units.
struct LectureSpace {
    std::vector<LectureElement> elements;
    Matrix d;
    Vector mu;
    Matrix chron;  // normalized components
    Matrix logic;
    Matrix sem;
    LectureWeights alpha;

    std::size_t size() const { return elements.size(); }
    std::vector<std::string> texts() const;
};

LectureSpace build_lecture_space(std::vector<LectureElement> elements, const embed::EmbeddingMatrix& embeddings,
                                 const LectureWeights& alpha = {});

/// Convenience: parse, flatten, embed and build in one call.
LectureSpace lecture_space_from_markdown(std::string_view markdown, const embed::EmbeddingProvider& provider,
                                         const LectureWeights& alpha = {});

nlohmann::json to_json(const LectureSpace& space);
/// Parses and validates a lecture-space artifact. Throws InputError.
LectureSpace lecture_space_from_json(const nlohmann::json& doc);

}  // namespace rdkg::lecture
