#include "rdkg/errors.hpp"
#include "rdkg/lecture_space.hpp"
#include "rdkg/text.hpp"

#include <cctype>
#include <optional>

namespace rdkg::lecture {

namespace {

struct Heading {
    int level;
    std::string title;
};

std::size_t leading_spaces(std::string_view line) {
    std::size_t n = 0;
    while (n < line.size() && line[n] == ' ') ++n;
    return n;
}

std::optional<Heading> match_heading(std::string_view line) {
    const std::size_t indent = leading_spaces(line);
    if (indent > 3) return std::nullopt;
    std::size_t p = indent;
    int level = 0;
    while (p < line.size() && line[p] == '#') {
        ++level;
        ++p;
    }
    if (level < 1 || level > 6) return std::nullopt;
    if (p < line.size() && line[p] != ' ' && line[p] != '\t') return std::nullopt;
    std::string title = text::trim(line.substr(p));
    // Optional closing sequence: whitespace followed by '#'s only.
    std::size_t e = title.size();
    while (e > 0 && title[e - 1] == '#') --e;
    if (e == 0) {
        title.clear();
    } else if (e < title.size() && (title[e - 1] == ' ' || title[e - 1] == '\t')) {
        title = text::trim(std::string_view(title).substr(0, e));
    }
    return Heading{level, title};
}

struct Fence {
    char ch;
    std::size_t len;
};

std::optional<Fence> match_fence_open(std::string_view line) {
    const std::size_t indent = leading_spaces(line);
    if (indent > 3 || indent >= line.size()) return std::nullopt;
    const char ch = line[indent];
    if (ch != '`' && ch != '~') return std::nullopt;
    std::size_t n = 0;
    while (indent + n < line.size() && line[indent + n] == ch) ++n;
    if (n < 3) return std::nullopt;
    if (ch == '`' && line.substr(indent + n).find('`') != std::string_view::npos) return std::nullopt;
    return Fence{ch, n};
}

bool closes_fence(std::string_view line, const Fence& f) {
    const std::size_t indent = leading_spaces(line);
    if (indent > 3) return false;
    std::size_t n = 0;
    while (indent + n < line.size() && line[indent + n] == f.ch) ++n;
    return n >= f.len && text::trim(line.substr(indent + n)).empty();
}

bool is_thematic_break(std::string_view line) {
    const std::string t = text::trim(line);
    if (t.size() < 3) return false;
    const char c = t[0];
    if (c != '-' && c != '*' && c != '_') return false;
    int count = 0;
    for (char x : t) {
        if (x == c) {
            ++count;
        } else if (x != ' ' && x != '\t') {
            return false;
        }
    }
    return count >= 3;
}

// Returns the item text when the line opens a bullet or ordered list item.
std::optional<std::string> match_list_item(std::string_view line) {
    std::size_t p = 0;
    while (p < line.size() && (line[p] == ' ' || line[p] == '\t')) ++p;
    if (p >= line.size()) return std::nullopt;
    std::size_t q = p;
    if (line[q] == '-' || line[q] == '*' || line[q] == '+') {
        ++q;
    } else {
        std::size_t digits = 0;
        while (q < line.size() && std::isdigit(static_cast<unsigned char>(line[q])) != 0 && digits < 9) {
            ++q;
            ++digits;
        }
        if (digits == 0 || q >= line.size() || (line[q] != '.' && line[q] != ')')) return std::nullopt;
        ++q;
    }
    if (q < line.size() && line[q] != ' ' && line[q] != '\t') return std::nullopt;
    return text::trim(line.substr(q));
}

class Parser {
public:
    Section run(std::string_view markdown) {
        root_.id = "s0";
        root_.level = 0;
        root_.title = kRootTitle;
        stack_.push_back(&root_);

        std::size_t start = 0;
        int lineno = 0;
        while (start <= markdown.size()) {
            std::size_t end = markdown.find('\n', start);
            if (end == std::string_view::npos) end = markdown.size();
            std::string_view line = markdown.substr(start, end - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            ++lineno;
            feed(line, lineno);
            if (end == markdown.size()) break;
            start = end + 1;
        }
        flush(lineno);
        return std::move(root_);
    }

private:
    enum class Mode { None, Paragraph, ListItem, Code, Math };

    void feed(std::string_view line, int lineno) {
        if (mode_ == Mode::Code) {
            if (closes_fence(line, fence_)) {
                flush(lineno);
            } else {
                append(line);
            }
            return;
        }
        if (mode_ == Mode::Math) {
            const std::string t = text::trim(line);
            const bool dollar_close = math_close_ == "$$" && t.size() >= 2 && t.ends_with("$$");
            const bool bracket_close = math_close_ == "\\]" && t.ends_with("\\]");
            if (dollar_close || bracket_close) {
                append(t.substr(0, t.size() - 2));
                flush(lineno);
            } else {
                append(line);
            }
            return;
        }

        if (text::trim(line).empty()) {
            flush(lineno - 1);
            return;
        }
        if (auto h = match_heading(line)) {
            flush(lineno - 1);
            open_section(*h, lineno);
            return;
        }
        if (auto f = match_fence_open(line)) {
            flush(lineno - 1);
            fence_ = *f;
            begin(Mode::Code, BlockKind::Code, lineno);
            return;
        }
        const std::string trimmed = text::trim(line);
        if (trimmed.starts_with("$$") || trimmed.starts_with("\\[")) {
            flush(lineno - 1);
            const bool dollars = trimmed.starts_with("$$");
            const std::string close = dollars ? "$$" : "\\]";
            const std::string rest = trimmed.substr(2);
            if (rest.size() >= 2 && rest.ends_with(close)) {
                begin(Mode::Math, BlockKind::Math, lineno);
                append(rest.substr(0, rest.size() - 2));
                flush(lineno);
            } else {
                math_close_ = close;
                begin(Mode::Math, BlockKind::Math, lineno);
                if (!text::trim(rest).empty()) append(rest);
            }
            return;
        }
        if (is_thematic_break(line)) {
            flush(lineno - 1);
            return;
        }
        if (auto item = match_list_item(line)) {
            flush(lineno - 1);
            begin(Mode::ListItem, BlockKind::ListItem, lineno);
            append(*item);
            return;
        }
        if (mode_ == Mode::None) begin(Mode::Paragraph, BlockKind::Paragraph, lineno);
        append(line);
    }

    void begin(Mode m, BlockKind kind, int lineno) {
        mode_ = m;
        current_ = Block{kind, {}, lineno, lineno};
        has_text_ = false;
    }

    void append(std::string_view s) {
        if (has_text_) current_.text.push_back('\n');
        current_.text.append(s);
        has_text_ = true;
    }

    void flush(int last_line) {
        if (mode_ == Mode::None) return;
        current_.line_end = std::max(current_.line_begin, last_line);
        stack_.back()->blocks.push_back(std::move(current_));
        current_ = Block{};
        mode_ = Mode::None;
        has_text_ = false;
    }

    void open_section(const Heading& h, int lineno) {
        while (stack_.size() > 1 && stack_.back()->level >= h.level) stack_.pop_back();
        Section s;
        s.id = "s" + std::to_string(++section_counter_);
        s.level = h.level;
        s.title = h.title;
        s.line = lineno;
        Section* parent = stack_.back();
        parent->children.push_back(std::move(s));
        stack_.push_back(&parent->children.back());
    }

    Section root_;
    // Pointers stay valid: a parent's children vector is only appended to
    // while that parent is on top of the stack, and deeper entries are
    // popped before any shallower vector grows again.
    std::vector<Section*> stack_;
    Mode mode_ = Mode::None;
    Block current_;
    bool has_text_ = false;
    Fence fence_{'`', 3};
    std::string math_close_ = "$$";
    int section_counter_ = 0;
};

const char* kind_name(BlockKind k) {
    switch (k) {
        case BlockKind::Paragraph: return "paragraph";
        case BlockKind::ListItem: return "list_item";
        case BlockKind::Code: return "code";
        case BlockKind::Math: return "math";
    }
    return "paragraph";
}

}  // namespace

Section parse_markdown(std::string_view markdown) {
    if (text::trim(markdown).empty()) throw InputError("empty input");
    return Parser{}.run(markdown);
}

nlohmann::json section_to_json(const Section& s) {
    nlohmann::json j;
    j["id"] = s.id;
    j["level"] = s.level;
    j["title"] = s.title;
    j["content"] = nlohmann::json::array();
    for (const auto& b : s.blocks) {
        j["content"].push_back({{"kind", kind_name(b.kind)}, {"text", b.text}, {"lines", {b.line_begin, b.line_end}}});
    }
    j["children"] = nlohmann::json::array();
    for (const auto& c : s.children) j["children"].push_back(section_to_json(c));
    return j;
}

std::size_t heading_count(const Section& root) {
    std::size_t n = 0;
    for (const auto& c : root.children) n += 1 + heading_count(c);
    return n;
}

}  // namespace rdkg::lecture
