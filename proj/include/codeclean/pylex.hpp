#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace codeclean {

// Lexical utilities for the corpus language (Python source). Two consumers:
// shingling wants a comment-stripped token stream, structure analysis wants
// physical lines annotated with indent and logical-line boundaries. Both must
// survive strings containing quotes, hashes, and brackets.

namespace pylex {

inline bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

inline bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// String-literal prefixes: any of r/b/u/f in either case, length <= 2.
inline bool is_string_prefix(std::string_view s) {
    if (s.empty() || s.size() > 2) return false;
    for (char c : s) {
        char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (l != 'r' && l != 'b' && l != 'u' && l != 'f') return false;
    }
    return true;
}

// Scans a string literal starting at `pos` (which must point at a quote).
// Returns one past the end, or src.size() when unterminated (sets *ok=false).
inline size_t scan_string(std::string_view src, size_t pos, bool* ok) {
    char quote = src[pos];
    bool triple = pos + 2 < src.size() && src[pos + 1] == quote && src[pos + 2] == quote;
    size_t i = pos + (triple ? 3 : 1);
    while (i < src.size()) {
        char c = src[i];
        if (c == '\\') {
            i += 2;
            continue;
        }
        if (!triple && (c == '\n' || c == '\r')) break;  // unterminated single-line string
        if (c == quote) {
            if (!triple) {
                if (ok) *ok = true;
                return i + 1;
            }
            if (i + 2 < src.size() && src[i + 1] == quote && src[i + 2] == quote) {
                if (ok) *ok = true;
                return i + 3;
            }
        }
        ++i;
    }
    if (ok) *ok = false;
    return src.size();
}

}  // namespace pylex

struct TokenizeResult {
    std::vector<std::string> tokens;
    bool warning = false;  // unterminated string encountered
};

// Comment-stripped, whitespace-normalized token stream. Identifiers, numbers,
// string literals (kept verbatim including quotes) and operators each become
// one token; comments and all whitespace (including newlines) vanish.
inline TokenizeResult lex_tokens(std::string_view src) {
    TokenizeResult result;
    static const char* multi_ops[] = {"**=", "//=", ">>=", "<<=", "...", "!=", "==", "<=", ">=",
                                      "->",  ":=",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=",
                                      "^=",  "//",  "**",  "<<",  ">>"};
    size_t i = 0;
    while (i < src.size()) {
        char c = src[i];
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '\'' || c == '"') {
            bool ok = true;
            size_t end = pylex::scan_string(src, i, &ok);
            if (!ok) result.warning = true;
            result.tokens.emplace_back(src.substr(i, end - i));
            i = end;
            continue;
        }
        if (pylex::is_ident_start(c)) {
            size_t start = i;
            while (i < src.size() && pylex::is_ident_char(src[i])) ++i;
            // r"..." / f'...' etc: prefix plus literal is one string token.
            if (i < src.size() && (src[i] == '\'' || src[i] == '"') &&
                pylex::is_string_prefix(src.substr(start, i - start))) {
                bool ok = true;
                size_t end = pylex::scan_string(src, i, &ok);
                if (!ok) result.warning = true;
                result.tokens.emplace_back(src.substr(start, end - start));
                i = end;
                continue;
            }
            result.tokens.emplace_back(src.substr(start, i - start));
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            size_t start = i;
            while (i < src.size() &&
                   (pylex::is_ident_char(src[i]) || src[i] == '.' ||
                    ((src[i] == '+' || src[i] == '-') && i > start &&
                     (src[i - 1] == 'e' || src[i - 1] == 'E'))))
                ++i;
            result.tokens.emplace_back(src.substr(start, i - start));
            continue;
        }
        bool matched = false;
        for (const char* op : multi_ops) {
            size_t len = std::char_traits<char>::length(op);
            if (src.substr(i, len) == op) {
                result.tokens.emplace_back(op);
                i += len;
                matched = true;
                break;
            }
        }
        if (!matched) {
            result.tokens.emplace_back(1, c);
            ++i;
        }
    }
    return result;
}

struct PhysicalLine {
    std::string text;
    int indent = 0;            // columns, tabs advance to the next multiple of 8
    bool blank = false;        // empty or whitespace-only
    bool comment_only = false; // first non-space char is '#'
    bool logical_start = true; // false for continuation lines (brackets, backslash, open string)
};

struct LineScan {
    std::vector<PhysicalLine> lines;
    bool warning = false;  // unterminated string or unbalanced brackets at EOF
};

// Splits source into physical lines and marks which of them begin a logical
// line, tracking multi-line strings, bracket nesting and backslash
// continuations across line boundaries.
inline LineScan scan_lines(std::string_view src) {
    LineScan scan;
    int bracket_depth = 0;
    bool backslash_cont = false;
    bool in_string = false;
    char string_quote = 0;
    bool string_triple = false;

    size_t pos = 0;
    while (pos <= src.size()) {
        size_t eol = src.find('\n', pos);
        std::string_view line =
            eol == std::string_view::npos ? src.substr(pos) : src.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        PhysicalLine info;
        info.text = std::string(line);
        info.logical_start = !in_string && bracket_depth == 0 && !backslash_cont;
        backslash_cont = false;

        int col = 0;
        size_t first_nonspace = std::string_view::npos;
        for (size_t i = 0; i < line.size(); ++i) {
            if (line[i] == ' ') ++col;
            else if (line[i] == '\t') col += 8 - (col % 8);
            else {
                first_nonspace = i;
                break;
            }
        }
        info.indent = col;
        info.blank = first_nonspace == std::string_view::npos;
        info.comment_only =
            !info.blank && !in_string && info.logical_start && line[first_nonspace] == '#';

        // Advance the cross-line state over this line's characters.
        size_t i = 0;
        while (i < line.size()) {
            char c = line[i];
            if (in_string) {
                if (c == '\\') {
                    i += 2;
                    continue;
                }
                if (c == string_quote) {
                    if (!string_triple) {
                        in_string = false;
                        ++i;
                        continue;
                    }
                    if (i + 2 < line.size() && line[i + 1] == string_quote &&
                        line[i + 2] == string_quote) {
                        in_string = false;
                        i += 3;
                        continue;
                    }
                }
                ++i;
                continue;
            }
            if (c == '#') break;  // comment runs to end of line
            if (c == '\'' || c == '"') {
                bool triple = i + 2 < line.size() && line[i + 1] == c && line[i + 2] == c;
                bool ok = true;
                size_t end = pylex::scan_string(line, i, &ok);
                if (ok) {
                    i = end;
                    continue;
                }
                if (triple) {
                    in_string = true;
                    string_quote = c;
                    string_triple = true;
                    i = line.size();
                    continue;
                }
                // Unterminated single-line string: treat rest of line as its body.
                scan.warning = true;
                i = line.size();
                continue;
            }
            if (c == '(' || c == '[' || c == '{') ++bracket_depth;
            else if (c == ')' || c == ']' || c == '}') {
                if (bracket_depth > 0) --bracket_depth;
            } else if (c == '\\' && i + 1 == line.size()) {
                backslash_cont = true;
            }
            ++i;
        }
        scan.lines.push_back(std::move(info));
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    // Drop the phantom line produced by a trailing newline.
    if (!scan.lines.empty() && scan.lines.back().blank && src.size() > 0 && src.back() == '\n')
        scan.lines.pop_back();
    if (in_string || bracket_depth != 0) scan.warning = true;
    return scan;
}

}  // namespace codeclean
