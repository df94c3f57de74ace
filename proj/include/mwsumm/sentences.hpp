#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "mwsumm/strings.hpp"

namespace mwsumm {

namespace detail {

// Find the matching closer for a nested construct starting at `open_pos`
// (which points at `open`). Returns the index one past the closer, or
// npos if the construct never closes.
inline std::size_t match_nested(std::string_view s, std::size_t open_pos,
                                std::string_view open, std::string_view close) {
    std::size_t depth = 0;
    std::size_t i = open_pos;
    while (i < s.size()) {
        if (s.compare(i, open.size(), open) == 0) {
            ++depth;
            i += open.size();
        } else if (s.compare(i, close.size(), close) == 0) {
            --depth;
            i += close.size();
            if (depth == 0) return i;
        } else {
            ++i;
        }
    }
    return std::string_view::npos;
}

inline bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    }
    return true;
}

// Remove "<!-- ... -->" comments; an unterminated comment runs to the end.
inline std::string strip_comments(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s.compare(i, 4, "<!--") == 0) {
            std::size_t end = s.find("-->", i + 4);
            i = end == std::string_view::npos ? s.size() : end + 3;
        } else {
            out.push_back(s[i++]);
        }
    }
    return out;
}

// Remove <ref .../> and <ref ...>...</ref> elements. The removed footnote
// leaves nothing behind; surrounding whitespace is normalized later.
inline std::string strip_refs(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '<' && i + 4 <= s.size() && iequals(s.substr(i + 1, 3), "ref") &&
            (i + 4 == s.size() || s[i + 4] == '>' || s[i + 4] == ' ' ||
             s[i + 4] == '/' || s[i + 4] == '\t')) {
            std::size_t tag_end = s.find('>', i);
            if (tag_end == std::string_view::npos) break;  // unterminated tag
            if (s[tag_end - 1] == '/') {                   // self-closing
                i = tag_end + 1;
                continue;
            }
            // Find the closing </ref>.
            std::size_t close = i;
            while (true) {
                close = s.find("</", close + 1);
                if (close == std::string_view::npos) break;
                std::size_t name_end = s.find('>', close);
                if (name_end == std::string_view::npos) break;
                if (iequals(trim(std::string(s.substr(close + 2, name_end - close - 2))), "ref")) {
                    close = name_end + 1;
                    break;
                }
            }
            i = close == std::string_view::npos ? s.size() : close;
        } else {
            out.push_back(s[i++]);
        }
    }
    return out;
}

// Remove nested {{...}} templates and {|...|} tables. Unclosed constructs
// run to the end of the text.
inline std::string strip_braced(std::string_view s, std::string_view open,
                                std::string_view close) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s.compare(i, open.size(), open) == 0) {
            std::size_t end = match_nested(s, i, open, close);
            i = end == std::string_view::npos ? s.size() : end;
        } else {
            out.push_back(s[i++]);
        }
    }
    return out;
}

inline bool is_non_prose_link_target(std::string_view target) {
    std::string_view t = target;
    if (!t.empty() && t.front() == ':') t.remove_prefix(1);
    std::size_t colon = t.find(':');
    if (colon == std::string_view::npos) return false;
    std::string_view ns = t.substr(0, colon);
    return iequals(ns, "Category") || iequals(ns, "File") || iequals(ns, "Image");
}

// Resolve [[target]] / [[target|label]] to their visible text and drop
// category, file, and image links entirely.
inline std::string resolve_wiki_links(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s.compare(i, 2, "[[") == 0) {
            std::size_t end = match_nested(s, i, "[[", "]]");
            if (end == std::string_view::npos) {
                i += 2;  // stray opener, drop it
                continue;
            }
            std::string_view inner = s.substr(i + 2, end - i - 4);
            std::size_t pipe = std::string_view::npos;
            std::size_t depth = 0;
            for (std::size_t k = 0; k < inner.size(); ++k) {
                if (inner.compare(k, 2, "[[") == 0) { ++depth; ++k; continue; }
                if (inner.compare(k, 2, "]]") == 0) { --depth; ++k; continue; }
                if (inner[k] == '|' && depth == 0) { pipe = k; break; }
            }
            std::string_view target = pipe == std::string_view::npos ? inner : inner.substr(0, pipe);
            if (!is_non_prose_link_target(target)) {
                std::string_view label =
                    pipe == std::string_view::npos ? target : inner.substr(pipe + 1);
                out.append(resolve_wiki_links(label));
            }
            i = end;
        } else {
            out.push_back(s[i++]);
        }
    }
    return out;
}

// [http://url label] -> "label", [http://url] -> "".
inline std::string resolve_external_links(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        bool is_ext = s[i] == '[' &&
                      (s.compare(i + 1, 7, "http://") == 0 ||
                       s.compare(i + 1, 8, "https://") == 0 ||
                       s.compare(i + 1, 6, "ftp://") == 0 ||
                       s.compare(i + 1, 2, "//") == 0);
        if (is_ext) {
            std::size_t end = s.find(']', i);
            if (end == std::string_view::npos) {
                ++i;
                continue;
            }
            std::string_view inner = s.substr(i + 1, end - i - 1);
            std::size_t space = inner.find(' ');
            if (space != std::string_view::npos)
                out.append(trim(inner.substr(space + 1)));
            i = end + 1;
        } else {
            out.push_back(s[i++]);
        }
    }
    return out;
}

// Remove HTML-like tags (<br/>, <small>, ...) keeping their content. A '<'
// not followed by a tag-shaped sequence is kept as ordinary text.
inline std::string strip_html_tags(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '<' && i + 1 < s.size()) {
            std::size_t k = i + 1;
            if (s[k] == '/') ++k;
            if (k < s.size() && std::isalpha(static_cast<unsigned char>(s[k]))) {
                std::size_t end = s.find('>', k);
                if (end != std::string_view::npos && end - i < 256) {
                    i = end + 1;
                    continue;
                }
            }
        }
        out.push_back(s[i++]);
    }
    return out;
}

inline std::string strip_quote_markup(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '\'' && i + 1 < s.size() && s[i + 1] == '\'') {
            std::size_t run = 0;
            while (i + run < s.size() && s[i + run] == '\'') ++run;
            i += run;  // '' or ''' (or longer) is emphasis markup
        } else {
            out.push_back(s[i++]);
        }
    }
    return out;
}

inline bool is_heading_line(std::string_view line) {
    std::string t = trim(line);
    return t.size() >= 2 && t.front() == '=' && t.back() == '=';
}

inline std::string strip_list_markers(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && (line[i] == '*' || line[i] == '#' ||
                               line[i] == ':' || line[i] == ';'))
        ++i;
    return std::string(line.substr(i));
}

inline const std::unordered_set<std::string>& abbreviation_stop_list() {
    static const std::unordered_set<std::string> list = {
        "mr",  "mrs", "ms",  "dr",  "prof", "st",   "jr",  "sr",
        "vs",  "etc", "cf",  "al",  "inc",  "ltd",  "co",  "corp",
        "no",  "fig", "vol", "pp",  "ca",   "approx"};
    return list;
}

// Word immediately before position `dot` (exclusive), letters only.
inline std::string word_before(std::string_view s, std::size_t dot) {
    std::size_t b = dot;
    while (b > 0 && std::isalpha(static_cast<unsigned char>(s[b - 1]))) --b;
    return to_lower(s.substr(b, dot - b));
}

inline bool opens_sentence(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return std::isupper(u) || std::isdigit(u) || c == '"' || c == '\'' ||
           c == '(' || c == '[' || u >= 0x80;
}

inline bool has_prose(std::string_view s) {
    for (char c : s) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || u >= 0x80) return true;
    }
    return false;
}

}  // namespace detail

// Reduce wikitext to plain prose: templates, tables, category/file links,
// footnotes, emphasis markup, headings, and HTML tags are removed; wiki and
// external links are replaced by their visible labels.
inline std::string strip_wikitext(std::string_view wikitext) {
    std::string t = detail::strip_comments(wikitext);
    t = detail::strip_refs(t);
    t = detail::strip_braced(t, "{{", "}}");
    t = detail::strip_braced(t, "{|", "|}");
    t = detail::resolve_wiki_links(t);
    t = detail::resolve_external_links(t);
    t = detail::strip_quote_markup(t);
    t = detail::strip_html_tags(t);

    std::string out;
    out.reserve(t.size());
    std::size_t start = 0;
    while (start <= t.size()) {
        std::size_t nl = t.find('\n', start);
        std::string_view line(t.data() + start,
                              (nl == std::string::npos ? t.size() : nl) - start);
        if (!detail::is_heading_line(line)) {
            out.append(detail::strip_list_markers(line));
            out.push_back('\n');
        }
        if (nl == std::string::npos) break;
        start = nl + 1;
    }
    return out;
}

// Split one plain-text line into sentences at terminal punctuation (. ! ?)
// followed by whitespace and an upper-case/opening character, with an
// abbreviation stop list for periods.
inline void split_line_into_sentences(std::string_view line,
                                      std::vector<std::string>& out) {
    std::string text = collapse_whitespace(line);
    if (text.empty()) return;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c != '.' && c != '!' && c != '?') continue;
        std::size_t j = i;
        while (j + 1 < text.size() &&
               (text[j + 1] == '.' || text[j + 1] == '!' || text[j + 1] == '?' ||
                text[j + 1] == '"' || text[j + 1] == '\'' || text[j + 1] == ')' ||
                text[j + 1] == ']'))
            ++j;
        if (j + 1 >= text.size()) break;  // terminal run reaches end of line
        if (text[j + 1] != ' ') continue;
        std::size_t next = j + 2;
        if (next >= text.size() || !detail::opens_sentence(text[next])) continue;
        if (c == '.' && text[i] == '.' && j == i) {
            std::string w = detail::word_before(text, i);
            if (w.size() == 1) continue;  // initials: "J. Smith"
            if (detail::abbreviation_stop_list().count(w) > 0) continue;
        }
        std::string sentence = trim(text.substr(begin, j + 1 - begin));
        if (detail::has_prose(sentence)) out.push_back(std::move(sentence));
        begin = next;
        i = j;
    }
    std::string tail = trim(text.substr(begin));
    if (detail::has_prose(tail)) out.push_back(std::move(tail));
}

// Segment wikitext into prose sentences. Markup-only input yields an empty
// list; whitespace inside each sentence is collapsed to single spaces.
inline std::vector<std::string> segment_sentences(std::string_view wikitext) {
    std::vector<std::string> out;
    std::string prose = strip_wikitext(wikitext);
    std::size_t start = 0;
    while (start <= prose.size()) {
        std::size_t nl = prose.find('\n', start);
        std::string_view line(prose.data() + start,
                              (nl == std::string::npos ? prose.size() : nl) - start);
        split_line_into_sentences(line, out);
        if (nl == std::string::npos) break;
        start = nl + 1;
    }
    return out;
}

}  // namespace mwsumm
