#include "editex/post_parser.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "editex/text.hpp"

namespace editex {
namespace {

constexpr std::array<std::string_view, 14> kVoidElements{
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr"};

constexpr std::array<std::string_view, 27> kBlockElements{
    "address", "article", "aside", "blockquote", "br", "dd", "div", "dl", "dt",
    "figure", "footer", "h1", "h2", "h3", "h4", "h5", "h6", "header",
    "hr", "li", "ol", "p", "pre", "section", "table", "tr", "ul"};

bool contains(auto const& list, std::string_view name) {
    return std::find(list.begin(), list.end(), name) != list.end();
}

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

struct Node {
    bool is_text = false;
    std::string name;  // lowercase tag name
    std::vector<std::pair<std::string, std::string>> attrs;
    std::size_t begin = 0;  // outer range in the source
    std::size_t end = 0;
    int parent = -1;
    std::vector<int> children;

    const std::string* attr(std::string_view key) const {
        for (const auto& [k, v] : attrs) {
            if (k == key) return &v;
        }
        return nullptr;
    }

    bool has_class(std::string_view cls) const {
        const std::string* value = attr("class");
        if (!value) return false;
        std::string_view rest{*value};
        while (!rest.empty()) {
            while (!rest.empty() && is_space(rest.front())) rest.remove_prefix(1);
            std::size_t n = 0;
            while (n < rest.size() && !is_space(rest[n])) ++n;
            if (rest.substr(0, n) == cls) return true;
            rest.remove_prefix(n);
        }
        return false;
    }
};

class Document {
public:
    explicit Document(std::string_view src) : src_(src) {
        nodes_.push_back(Node{});  // synthetic root
        nodes_[0].end = src.size();
        parse();
    }

    std::string_view source() const { return src_; }
    const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    int root() const { return 0; }

    std::string_view outer(int i) const {
        const Node& n = node(i);
        return src_.substr(n.begin, n.end - n.begin);
    }

private:
    void parse() {
        std::vector<int> open{0};
        std::size_t i = 0;
        std::size_t text_start = 0;

        auto flush_text = [&](std::size_t upto) {
            if (upto > text_start) add_text(open.back(), text_start, upto);
        };

        while (i < src_.size()) {
            if (src_[i] != '<') {
                ++i;
                continue;
            }
            if (src_.compare(i, 4, "<!--") == 0) {
                flush_text(i);
                const auto close = src_.find("-->", i + 4);
                i = close == std::string_view::npos ? src_.size() : close + 3;
                text_start = i;
                continue;
            }
            if (i + 1 < src_.size() && (src_[i + 1] == '!' || src_[i + 1] == '?')) {
                flush_text(i);
                const auto close = src_.find('>', i);
                i = close == std::string_view::npos ? src_.size() : close + 1;
                text_start = i;
                continue;
            }
            const bool closing = i + 1 < src_.size() && src_[i + 1] == '/';
            const std::size_t name_at = i + (closing ? 2 : 1);
            if (name_at >= src_.size() || !is_alpha(src_[name_at])) {
                ++i;  // a literal '<'
                continue;
            }
            flush_text(i);
            const std::size_t tag_begin = i;
            std::size_t j = name_at;
            while (j < src_.size() && (is_alpha(src_[j]) || (src_[j] >= '0' && src_[j] <= '9') ||
                                       src_[j] == '-' || src_[j] == ':')) {
                ++j;
            }
            std::string name = ascii_lower(src_.substr(name_at, j - name_at));
            std::vector<std::pair<std::string, std::string>> attrs;
            bool self_closing = false;
            j = parse_attributes(j, attrs, self_closing);
            const std::size_t tag_end = j;

            if (closing) {
                close_element(open, name, tag_begin, tag_end);
            } else {
                open_element(open, std::move(name), std::move(attrs), self_closing, tag_begin, tag_end,
                             i);
                i = std::max(i, tag_end);
                text_start = i;
                continue;
            }
            i = tag_end;
            text_start = i;
        }
        flush_text(src_.size());
        for (std::size_t k = open.size(); k-- > 1;) nodes_[static_cast<std::size_t>(open[k])].end = src_.size();
    }

    // Returns the index just past the closing '>' (or end of input).
    std::size_t parse_attributes(std::size_t j, std::vector<std::pair<std::string, std::string>>& attrs,
                                 bool& self_closing) {
        while (j < src_.size()) {
            while (j < src_.size() && is_space(src_[j])) ++j;
            if (j >= src_.size()) break;
            if (src_[j] == '>') return j + 1;
            if (src_[j] == '/') {
                self_closing = j + 1 < src_.size() && src_[j + 1] == '>';
                ++j;
                continue;
            }
            std::size_t k = j;
            while (k < src_.size() && !is_space(src_[k]) && src_[k] != '=' && src_[k] != '>' &&
                   src_[k] != '/') {
                ++k;
            }
            if (k == j) {
                ++j;
                continue;
            }
            std::string key = ascii_lower(src_.substr(j, k - j));
            j = k;
            while (j < src_.size() && is_space(src_[j])) ++j;
            std::string value;
            if (j < src_.size() && src_[j] == '=') {
                ++j;
                while (j < src_.size() && is_space(src_[j])) ++j;
                if (j < src_.size() && (src_[j] == '"' || src_[j] == '\'')) {
                    const char quote = src_[j];
                    const auto close = src_.find(quote, j + 1);
                    const std::size_t stop = close == std::string_view::npos ? src_.size() : close;
                    value = decode_entities(src_.substr(j + 1, stop - j - 1));
                    j = stop == src_.size() ? stop : stop + 1;
                } else {
                    std::size_t e = j;
                    while (e < src_.size() && !is_space(src_[e]) && src_[e] != '>') ++e;
                    value = decode_entities(src_.substr(j, e - j));
                    j = e;
                }
            }
            attrs.emplace_back(std::move(key), std::move(value));
        }
        return src_.size();
    }

    void open_element(std::vector<int>& open, std::string name,
                      std::vector<std::pair<std::string, std::string>> attrs, bool self_closing,
                      std::size_t tag_begin, std::size_t tag_end, std::size_t& cursor) {
        // Implied end tags for the common unclosed paragraph and list item cases.
        if (name == "li" || name == "p" || contains(kBlockElements, name)) {
            const std::string_view implied = name == "li" ? "li" : "p";
            if (open.size() > 1 && node(open.back()).name == implied) {
                nodes_[static_cast<std::size_t>(open.back())].end = tag_begin;
                open.pop_back();
            }
        }
        const int parent = open.back();
        const int idx = static_cast<int>(nodes_.size());
        Node n;
        n.name = std::move(name);
        n.attrs = std::move(attrs);
        n.begin = tag_begin;
        n.end = tag_end;
        n.parent = parent;
        nodes_.push_back(std::move(n));
        nodes_[static_cast<std::size_t>(parent)].children.push_back(idx);

        const std::string& nm = nodes_.back().name;
        if (self_closing || contains(kVoidElements, nm)) return;

        if (nm == "script" || nm == "style") {
            const std::string close_tag = "</" + nm;
            std::size_t k = tag_end;
            std::size_t stop = src_.size();
            while (k < src_.size()) {
                const auto at = src_.find("</", k);
                if (at == std::string_view::npos) break;
                if (ascii_lower(src_.substr(at, close_tag.size())) == close_tag) {
                    stop = at;
                    break;
                }
                k = at + 2;
            }
            const auto gt = src_.find('>', stop);
            const std::size_t end = stop == src_.size() ? stop : (gt == std::string_view::npos ? src_.size() : gt + 1);
            nodes_[static_cast<std::size_t>(idx)].end = end;
            cursor = end;
            return;
        }
        open.push_back(idx);
    }

    void close_element(std::vector<int>& open, const std::string& name, std::size_t tag_begin,
                       std::size_t tag_end) {
        for (std::size_t k = open.size(); k-- > 1;) {
            if (node(open[k]).name != name) continue;
            while (open.size() > k + 1) {
                nodes_[static_cast<std::size_t>(open.back())].end = tag_begin;
                open.pop_back();
            }
            nodes_[static_cast<std::size_t>(open.back())].end = tag_end;
            open.pop_back();
            return;
        }
        // Stray end tag: ignored.
    }

    void add_text(int parent, std::size_t begin, std::size_t end) {
        Node n;
        n.is_text = true;
        n.begin = begin;
        n.end = end;
        n.parent = parent;
        const int idx = static_cast<int>(nodes_.size());
        nodes_.push_back(std::move(n));
        nodes_[static_cast<std::size_t>(parent)].children.push_back(idx);
    }

    std::string_view src_;
    std::vector<Node> nodes_;
};

bool is_code_block(const Document& doc, int i) {
    const Node& n = doc.node(i);
    if (n.is_text || n.name != "pre") return false;
    return std::any_of(n.children.begin(), n.children.end(), [&](int c) {
        const Node& child = doc.node(c);
        return !child.is_text && child.name == "code";
    });
}

// Appends plain text with soft block separators: a block boundary becomes one
// '\n', emitted lazily before the next character so output never starts or
// ends with a separator.
class PlainWriter {
public:
    explicit PlainWriter(std::string& out) : out_(out) {}

    void text(std::string_view decoded) {
        if (decoded.empty()) return;
        if (pending_ && !out_.empty() && out_.back() != '\n') out_.push_back('\n');
        pending_ = false;
        out_.append(decoded);
    }
    void boundary() { pending_ = true; }

private:
    std::string& out_;
    bool pending_ = false;
};

void write_plain(const Document& doc, int i, PlainWriter& w, bool skip_code_blocks) {
    const Node& n = doc.node(i);
    if (n.is_text) {
        w.text(decode_entities(doc.outer(i)));
        return;
    }
    if (n.name == "script" || n.name == "style") return;
    if (skip_code_blocks && is_code_block(doc, i)) return;
    const bool block = contains(kBlockElements, n.name);
    if (block) w.boundary();
    for (int c : n.children) write_plain(doc, c, w, skip_code_blocks);
    if (block) w.boundary();
}

std::string plain_of(const Document& doc, int i) {
    std::string out;
    PlainWriter w(out);
    const Node& n = doc.node(i);
    if (n.is_text) {
        w.text(decode_entities(doc.outer(i)));
    } else {
        for (int c : n.children) write_plain(doc, c, w, false);
    }
    return out;
}

void collect_links(const Document& doc, int i, std::vector<std::string>& out) {
    const Node& n = doc.node(i);
    if (n.is_text) return;
    if (n.name == "a") {
        if (const std::string* href = n.attr("href")) out.push_back(*href);
    }
    for (int c : n.children) collect_links(doc, c, out);
}

void collect_code_blocks(const Document& doc, int i, std::vector<int>& pres) {
    const Node& n = doc.node(i);
    if (n.is_text) return;
    if (is_code_block(doc, i)) {
        pres.push_back(i);
        return;
    }
    for (int c : n.children) collect_code_blocks(doc, c, pres);
}

void collect_diffs(const Document& doc, int i, bool in_pre, DiffSpans& out) {
    const Node& n = doc.node(i);
    if (n.is_text) return;
    const bool pre = in_pre || n.name == "pre";
    const bool added = n.has_class("diff-add");
    const bool removed = n.has_class("diff-delete");
    if (added || removed) {
        const std::string content = plain_of(doc, i);
        std::string& target = added ? (pre ? out.added_code : out.added_text)
                                    : (pre ? out.removed_code : out.removed_text);
        target += content;
        return;
    }
    for (int c : n.children) collect_diffs(doc, c, pre, out);
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
    out += encode_utf8(std::u32string(1, static_cast<char32_t>(cp)));
}

}  // namespace

std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        const auto semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 10) {
            out.push_back(s[i++]);
            continue;
        }
        const std::string_view ent = s.substr(i + 1, semi - i - 1);
        bool decoded = true;
        if (ent == "amp") {
            out.push_back('&');
        } else if (ent == "lt") {
            out.push_back('<');
        } else if (ent == "gt") {
            out.push_back('>');
        } else if (ent == "quot") {
            out.push_back('"');
        } else if (ent.size() >= 2 && ent[0] == '#') {
            const bool hex = ent[1] == 'x' || ent[1] == 'X';
            const std::string_view digits = ent.substr(hex ? 2 : 1);
            std::uint32_t cp = 0;
            bool ok = !digits.empty();
            for (char c : digits) {
                int d = -1;
                if (c >= '0' && c <= '9') d = c - '0';
                else if (hex && c >= 'a' && c <= 'f') d = c - 'a' + 10;
                else if (hex && c >= 'A' && c <= 'F') d = c - 'A' + 10;
                if (d < 0 || cp > 0x10FFFF) {
                    ok = false;
                    break;
                }
                cp = cp * (hex ? 16u : 10u) + static_cast<std::uint32_t>(d);
            }
            if (ok) {
                append_utf8(out, cp);
            } else {
                decoded = false;
            }
        } else {
            decoded = false;
        }
        if (decoded) {
            i = semi + 1;
        } else {
            out.push_back(s[i++]);
        }
    }
    return out;
}

ParsedBody parse_post(std::string_view body_html) {
    ParsedBody out;
    if (body_html.empty()) return out;

    const Document doc(body_html);
    std::vector<int> pres;
    collect_code_blocks(doc, doc.root(), pres);

    // Text channel: the source with the code blocks cut out.
    std::size_t cursor = 0;
    for (int p : pres) {
        const Node& n = doc.node(p);
        out.text_with_tags.append(body_html.substr(cursor, n.begin - cursor));
        cursor = n.end;
    }
    out.text_with_tags.append(body_html.substr(cursor));

    {
        PlainWriter w(out.text_plain);
        for (int c : doc.node(doc.root()).children) write_plain(doc, c, w, true);
    }

    bool first = true;
    for (int p : pres) {
        for (int c : doc.node(p).children) {
            const Node& child = doc.node(c);
            if (child.is_text || child.name != "code") continue;
            if (!first) {
                out.code_with_tags.push_back('\n');
                out.code_plain.push_back('\n');
            }
            first = false;
            out.code_with_tags.append(doc.outer(c));
            out.code_plain.append(plain_of(doc, c));
        }
    }

    collect_links(doc, doc.root(), out.hyperlinks);

    DiffSpans diffs;
    collect_diffs(doc, doc.root(), false, diffs);
    out.diff_added_text = std::move(diffs.added_text);
    out.diff_removed_text = std::move(diffs.removed_text);
    out.diff_added_code = std::move(diffs.added_code);
    out.diff_removed_code = std::move(diffs.removed_code);
    return out;
}

DiffSpans extract_diff_spans(std::string_view revision_html) {
    DiffSpans out;
    if (revision_html.empty()) return out;
    const Document doc(revision_html);
    collect_diffs(doc, doc.root(), false, out);
    return out;
}

}  // namespace editex
