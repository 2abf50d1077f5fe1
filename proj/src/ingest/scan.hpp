// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

// Low-level helpers shared by the flattener, normalizer and structure extractor.

#pragma once

#include <cctype>
#include <cstddef>
#include <optional>
#include <string_view>

namespace texdr::latex::scan {

inline bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

// s[i] is the character after a backslash. Returns the control-word name, or an
// empty view for control symbols such as \% or \\.
inline std::string_view command_name(std::string_view s, std::size_t i) {
    std::size_t j = i;
    while (j < s.size() && is_letter(s[j])) ++j;
    return s.substr(i, j - i);
}

// Index of the newline ending the comment that starts at i (or s.size()).
inline std::size_t comment_end(std::string_view s, std::size_t i) {
    auto nl = s.find('\n', i);
    return nl == std::string_view::npos ? s.size() : nl;
}

// Skips spaces/tabs and at most one newline, as TeX does after a control word.
inline std::size_t skip_command_space(std::string_view s, std::size_t i) {
    bool seen_newline = false;
    while (i < s.size()) {
        char c = s[i];
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
        } else if (c == '\n' && !seen_newline) {
            seen_newline = true;
            ++i;
        } else {
            break;
        }
    }
    return i;
}

// s[open] == '{'. Returns the index of the matching '}', honouring escapes and
// skipping comments.
inline std::optional<std::size_t> match_brace(std::string_view s, std::size_t open) {
    int depth = 0;
    for (std::size_t i = open; i < s.size(); ++i) {
        char c = s[i];
        if (c == '\\') {
            ++i;
        } else if (c == '%') {
            i = comment_end(s, i);
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i;
        }
    }
    return std::nullopt;
}

// s[open] == '['. Matching ']' at brace depth zero.
inline std::optional<std::size_t> match_bracket(std::string_view s, std::size_t open) {
    int braces = 0;
    for (std::size_t i = open + 1; i < s.size(); ++i) {
        char c = s[i];
        if (c == '\\') {
            ++i;
        } else if (c == '{') {
            ++braces;
        } else if (c == '}') {
            if (braces > 0) --braces;
        } else if (c == ']' && braces == 0) {
            return i;
        } else if (c == '\n' && i + 1 < s.size() && s[i + 1] == '\n') {
            return std::nullopt;  // paragraph break: not an optional argument
        }
    }
    return std::nullopt;
}

inline bool is_verbatim_env(std::string_view env) {
    return env == "verbatim" || env == "verbatim*" || env == "Verbatim" || env == "lstlisting" ||
           env == "minted";
}

inline bool is_math_env(std::string_view env) {
    for (std::string_view m : {"equation", "equation*", "align", "align*", "gather", "gather*",
                               "multline", "multline*", "eqnarray", "eqnarray*", "displaymath",
                               "math", "flalign", "flalign*", "alignat", "alignat*"}) {
        if (env == m) return true;
    }
    return false;
}

// Reads "{name}" after \begin or \end. `i` points just past the command word.
// Returns (name, index after the closing brace).
struct EnvName {
    std::string_view name;
    std::size_t next = 0;
};

inline std::optional<EnvName> env_name(std::string_view s, std::size_t i) {
    std::size_t j = i;
    while (j < s.size() && (s[j] == ' ' || s[j] == '\t')) ++j;
    if (j >= s.size() || s[j] != '{') return std::nullopt;
    auto close = s.find('}', j);
    if (close == std::string_view::npos) return std::nullopt;
    auto name = s.substr(j + 1, close - j - 1);
    if (name.find_first_of("{\\\n") != std::string_view::npos) return std::nullopt;
    return EnvName{name, close + 1};
}

// Position of the literal "\end{env}" at or after `from` (verbatim-style search).
inline std::size_t find_literal_end(std::string_view s, std::size_t from, std::string_view env) {
    std::size_t pos = from;
    while (true) {
        pos = s.find("\\end", pos);
        if (pos == std::string_view::npos) return std::string_view::npos;
        if (auto e = env_name(s, pos + 4); e && e->name == env) return pos;
        pos += 4;
    }
}

struct Argument {
    std::size_t begin = 0;  // first char inside the braces
    std::size_t end = 0;    // index of the closing brace
    std::size_t next = 0;   // index after the closing brace
};

// After a control word at `i`: optional '*', up to `max_optional` [...] groups,
// then one {...} group. Returns nullopt when there is no brace group.
inline std::optional<Argument> command_argument(std::string_view s, std::size_t i, int max_optional = 2) {
    if (i < s.size() && s[i] == '*') ++i;
    std::size_t j = skip_command_space(s, i);
    for (int k = 0; k < max_optional && j < s.size() && s[j] == '['; ++k) {
        auto close = match_bracket(s, j);
        if (!close) return std::nullopt;
        j = skip_command_space(s, *close + 1);
    }
    if (j >= s.size() || s[j] != '{') return std::nullopt;
    auto close = match_brace(s, j);
    if (!close) return std::nullopt;
    return Argument{j + 1, *close, *close + 1};
}

}  // namespace texdr::latex::scan
