#include "editex/text.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace editex {
namespace {

constexpr char32_t kInvalidBase = 0xDC00;

bool is_cont(unsigned char c) { return (c & 0xC0) == 0x80; }

// Shrinks [a, b] to the region that differs; shared prefix and suffix never
// change either metric.
void trim_common(std::u32string_view& a, std::u32string_view& b) {
    std::size_t pre = 0;
    while (pre < a.size() && pre < b.size() && a[pre] == b[pre]) ++pre;
    a.remove_prefix(pre);
    b.remove_prefix(pre);
    std::size_t suf = 0;
    while (suf < a.size() && suf < b.size() && a[a.size() - 1 - suf] == b[b.size() - 1 - suf]) ++suf;
    a.remove_suffix(suf);
    b.remove_suffix(suf);
}

}  // namespace

std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c0 = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (c0 < 0x80) {
            len = 1;
            cp = c0;
        } else if ((c0 & 0xE0) == 0xC0 && c0 >= 0xC2) {
            len = 2;
            cp = c0 & 0x1F;
        } else if ((c0 & 0xF0) == 0xE0) {
            len = 3;
            cp = c0 & 0x0F;
        } else if ((c0 & 0xF8) == 0xF0 && c0 <= 0xF4) {
            len = 4;
            cp = c0 & 0x07;
        }
        bool ok = len > 0 && i + len <= s.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            const auto c = static_cast<unsigned char>(s[i + k]);
            if (!is_cont(c)) {
                ok = false;
            } else {
                cp = (cp << 6) | (c & 0x3F);
            }
        }
        if (ok) {
            // Reject overlong forms, surrogates and out-of-range values.
            if ((len == 3 && cp < 0x800) || (len == 4 && (cp < 0x10000 || cp > 0x10FFFF)) ||
                (cp >= 0xD800 && cp <= 0xDFFF)) {
                ok = false;
            }
        }
        if (ok) {
            out.push_back(cp);
            i += len;
        } else {
            out.push_back(kInvalidBase + c0);
            ++i;
        }
    }
    return out;
}

std::string encode_utf8(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : s) {
        if (cp >= kInvalidBase + 0x80 && cp <= kInvalidBase + 0xFF) {
            out.push_back(static_cast<char>(cp - kInvalidBase));
        } else if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

std::size_t char_length(std::string_view s) {
    return decode_utf8(s).size();
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
    trim_common(a, b);
    if (a.size() < b.size()) std::swap(a, b);
    if (b.empty()) return a.size();

    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            row[j] = std::min({up + 1, row[j - 1] + 1, sub});
            diag = up;
        }
    }
    return row[b.size()];
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a == b) return 0;
    return levenshtein(std::u32string_view{decode_utf8(a)}, std::u32string_view{decode_utf8(b)});
}

std::size_t lcs_length(std::string_view a8, std::string_view b8) {
    const std::u32string da = decode_utf8(a8);
    const std::u32string db = decode_utf8(b8);
    std::u32string_view a{da};
    std::u32string_view b{db};
    const std::size_t common = da.size();
    trim_common(a, b);
    const std::size_t shared = common - a.size();
    if (a.size() < b.size()) std::swap(a, b);
    if (b.empty()) return shared;

    std::vector<std::size_t> row(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = 0;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(up, row[j - 1]);
            diag = up;
        }
    }
    return shared + row[b.size()];
}

std::string ascii_lower(std::string_view s) {
    std::string out{s};
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::string normalize_text(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c != '\n' && c != '\r') out.push_back(c);
    }
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\f' || c == '\v'; };
    std::size_t begin = 0;
    while (begin < out.size() && is_space(out[begin])) ++begin;
    std::size_t end = out.size();
    while (end > begin && is_space(out[end - 1])) --end;
    return ascii_lower(std::string_view{out}.substr(begin, end - begin));
}

}  // namespace editex
