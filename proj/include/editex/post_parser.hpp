#pragma once

#include <string>
#include <string_view>

#include "editex/types.hpp"

namespace editex {

/// Splits an HTML post body into its text and code channels.
///
/// Code blocks are the `<code>` elements that are direct children of a
/// `<pre>`; every such `<pre>` is cut out of the text channel. Inline
/// `<code>` stays in the text channel. Plain forms have tags stripped and
/// entities decoded. Block-level boundaries in the text channel become a
/// single newline so that adjacent paragraphs do not fuse into one word.
///
/// Never throws on malformed markup: unclosed tags are closed at the end of
/// their parent, stray end tags are ignored.
ParsedBody parse_post(std::string_view body_html);

struct DiffSpans {
    std::string added_text;
    std::string removed_text;
    std::string added_code;
    std::string removed_code;

    friend bool operator==(const DiffSpans&, const DiffSpans&) = default;
};

/// Collects the plain content of elements classed `diff-add` / `diff-delete`
/// in a rendered revision diff. Spans under a `<pre>` go to the code outputs.
DiffSpans extract_diff_spans(std::string_view revision_html);

/// Decodes &amp; &lt; &gt; &quot; &#39; and numeric references; any other
/// entity is left as written.
std::string decode_entities(std::string_view s);

}  // namespace editex
