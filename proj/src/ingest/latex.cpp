// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "texdr/latex.hpp"

#include <algorithm>
#include <set>

#include "scan.hpp"
#include "texdr/error.hpp"
#include "texdr/text.hpp"

namespace texdr::latex {

std::string normalize_path(std::string_view path) {
    std::string p(path);
    std::replace(p.begin(), p.end(), '\\', '/');
    if (p.empty()) throw Error(ErrorCode::kInvalidArgument, "empty path");
    if (p.front() == '/') throw Error(ErrorCode::kInvalidArgument, "absolute path: " + p);
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= p.size()) {
        auto slash = p.find('/', start);
        if (slash == std::string::npos) slash = p.size();
        std::string part = p.substr(start, slash - start);
        if (part == "..") {
            if (parts.empty()) throw Error(ErrorCode::kInvalidArgument, "path escapes project: " + p);
            parts.pop_back();
        } else if (!part.empty() && part != ".") {
            parts.push_back(std::move(part));
        }
        start = slash + 1;
    }
    if (parts.empty()) throw Error(ErrorCode::kInvalidArgument, "path has no components: " + p);
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += '/';
        out += parts[i];
    }
    return out;
}

void LatexProject::validate() const {
    if (!files.contains(root_file))
        throw Error(ErrorCode::kInvalidArgument, "root file not in project: " + root_file);
    auto check = [](const std::string& p) {
        if (normalize_path(p) != p) throw Error(ErrorCode::kInvalidArgument, "path not normalized: " + p);
    };
    for (const auto& [p, _] : files) check(p);
    for (const auto& [p, _] : assets) check(p);
}

// ---------------------------------------------------------------------------
// flatten

namespace {

class Flattener {
public:
    Flattener(const LatexProject& project, const FlattenOptions& options, Diagnostics* diag)
        : project_(project), options_(options), diag_(diag) {}

    FlatSource run() {
        emit(project_.root_file);
        return std::move(flat_);
    }

private:
    void append(const std::string& file, std::size_t b, std::size_t e) {
        if (b >= e) return;
        const std::string& src = project_.files.at(file);
        std::size_t out_b = flat_.text.size();
        flat_.text.append(src, b, e - b);
        flat_.origin_map.push_back({out_b, flat_.text.size(), file, b, e});
    }

    void append_newline() {
        std::size_t out_b = flat_.text.size();
        flat_.text.push_back('\n');
        flat_.origin_map.push_back({out_b, out_b + 1, std::string(), 0, 1});
    }

    std::optional<std::string> resolve(std::string_view target) const {
        std::string base;
        try {
            base = normalize_path(text::trim(target));
        } catch (const Error&) {
            return std::nullopt;
        }
        std::vector<std::string> candidates;
        if (base.size() >= 4 && base.compare(base.size() - 4, 4, ".tex") == 0) {
            candidates.push_back(base);
        } else {
            candidates.push_back(base + ".tex");
            candidates.push_back(base);
        }
        for (const auto& c : candidates)
            if (project_.files.contains(c)) return c;
        return std::nullopt;
    }

    void emit(const std::string& file) {
        if (auto it = std::find(stack_.begin(), stack_.end(), file); it != stack_.end()) {
            std::string path;
            for (; it != stack_.end(); ++it) path += *it + " -> ";
            throw Error(ErrorCode::kIncludeCycle, path + file);
        }
        stack_.push_back(file);
        const std::string_view s = project_.files.at(file);
        const std::size_t n = s.size();
        std::size_t copy_from = 0;
        std::size_t i = 0;
        while (i < n) {
            const char c = s[i];
            if (c == '%') {
                i = scan::comment_end(s, i);
                continue;
            }
            if (c != '\\' || i + 1 >= n) {
                ++i;
                continue;
            }
            if (!scan::is_letter(s[i + 1])) {
                i += 2;
                continue;
            }
            const auto name = scan::command_name(s, i + 1);
            const std::size_t after = i + 1 + name.size();
            if (name == "begin") {
                if (auto env = scan::env_name(s, after); env && scan::is_verbatim_env(env->name)) {
                    auto end = scan::find_literal_end(s, env->next, env->name);
                    i = end == std::string_view::npos ? n : end + 4;
                    continue;
                }
            }
            if (name != "input" && name != "include") {
                i = after;
                continue;
            }
            std::string_view target;
            std::size_t end = after;
            std::size_t j = after;
            while (j < n && (s[j] == ' ' || s[j] == '\t')) ++j;
            if (j < n && s[j] == '{') {
                auto close = scan::match_brace(s, j);
                if (!close) {
                    if (diag_) diag_->add("unbalanced_include", file + ": unterminated \\" + std::string(name));
                    i = after;
                    continue;
                }
                target = s.substr(j + 1, *close - j - 1);
                end = *close + 1;
            } else if (name == "input" && j > after) {
                std::size_t k = j;
                while (k < n && !text::is_space(s[k]) && s[k] != '{' && s[k] != '}' && s[k] != '%' &&
                       s[k] != '\\')
                    ++k;
                target = s.substr(j, k - j);
                end = k;
            }
            if (text::trim(target).empty()) {
                i = after;
                continue;
            }
            const bool is_include = name == "include";
            append(file, copy_from, i);
            if (is_include) append_newline();
            if (auto resolved = resolve(target)) {
                emit(*resolved);
            } else if (options_.lenient) {
                if (diag_) diag_->add("missing_include", file + ": " + std::string(target));
            } else {
                throw Error(ErrorCode::kMissingInclude, file + " references " + std::string(target));
            }
            if (is_include) append_newline();
            copy_from = end;
            i = end;
        }
        append(file, copy_from, n);
        stack_.pop_back();
    }

    const LatexProject& project_;
    const FlattenOptions& options_;
    Diagnostics* diag_;
    FlatSource flat_;
    std::vector<std::string> stack_;
};

}  // namespace

FlatSource flatten(const LatexProject& project, const FlattenOptions& options, Diagnostics* diag) {
    if (!project.files.contains(project.root_file))
        throw Error(ErrorCode::kInvalidArgument, "root file not in project: " + project.root_file);
    return Flattener(project, options, diag).run();
}

std::string reconstruct(const LatexProject& project, const FlatSource& flat) {
    std::string out;
    for (const auto& seg : flat.origin_map) {
        if (seg.synthetic()) {
            out.append(seg.out_end - seg.out_begin, '\n');
        } else {
            out.append(project.files.at(seg.file), seg.src_begin, seg.src_end - seg.src_begin);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// normalize

void NormalizationPolicy::validate() const {
    std::set<std::string> removed(remove_commands.begin(), remove_commands.end());
    for (const auto& u : unwrap_commands)
        if (removed.contains(u))
            throw Error(ErrorCode::kInvalidArgument, "command both removed and unwrapped: " + u);
}

namespace {

class Normalizer {
public:
    Normalizer(const NormalizationPolicy& policy, Diagnostics* diag)
        : strip_(policy.strip_comments),
          remove_(policy.remove_commands.begin(), policy.remove_commands.end()),
          unwrap_(policy.unwrap_commands.begin(), policy.unwrap_commands.end()),
          diag_(diag) {}

    std::string run(std::string_view s) {
        std::string out;
        out.reserve(s.size());
        const std::size_t n = s.size();
        std::size_t i = 0;
        while (i < n) {
            const char c = s[i];
            if (c == '%') {
                i = comment(s, i, out);
            } else if (c == '$') {
                i = dollar_math(s, i, out);
            } else if (c == '\\') {
                i = command(s, i, out);
            } else {
                out.push_back(c);
                ++i;
            }
        }
        return out;
    }

private:
    void note(const char* kind, std::string_view where) {
        if (diag_) diag_->add(kind, std::string(where.substr(0, 40)));
    }

    std::size_t comment(std::string_view s, std::size_t i, std::string& out) const {
        std::size_t e = scan::comment_end(s, i);
        if (!strip_) out.append(s.substr(i, e - i));
        return e;
    }

    // Copies [b, e) keeping math verbatim apart from comment removal.
    void copy_math(std::string_view s, std::size_t b, std::size_t e, std::string& out) const {
        for (std::size_t i = b; i < e;) {
            if (s[i] == '\\' && i + 1 < e) {
                out.append(s.substr(i, 2));
                i += 2;
            } else if (s[i] == '%') {
                i = std::min(comment(s, i, out), e);
            } else {
                out.push_back(s[i++]);
            }
        }
    }

    std::size_t dollar_math(std::string_view s, std::size_t i, std::string& out) {
        const bool display = i + 1 < s.size() && s[i + 1] == '$';
        const std::size_t dlen = display ? 2 : 1;
        for (std::size_t j = i + dlen; j < s.size(); ++j) {
            if (s[j] == '\\') {
                ++j;
            } else if (s[j] == '%') {
                j = scan::comment_end(s, j);
            } else if (s[j] == '$') {
                if (display && !(j + 1 < s.size() && s[j + 1] == '$')) continue;
                copy_math(s, i, j + dlen, out);
                return j + dlen;
            }
        }
        note("unclosed_math", s.substr(i));
        out.append(s.substr(i, dlen));
        return i + dlen;
    }

    std::size_t delimited_math(std::string_view s, std::size_t i, std::string_view close, std::string& out) {
        auto e = s.find(close, i + 2);
        if (e == std::string_view::npos) {
            note("unclosed_math", s.substr(i));
            out.append(s.substr(i, 2));
            return i + 2;
        }
        copy_math(s, i, e + close.size(), out);
        return e + close.size();
    }

    // Position of the '{' that would open the argument, or npos.
    static std::size_t argument_open(std::string_view s, std::size_t after) {
        std::size_t j = after;
        if (j < s.size() && s[j] == '*') ++j;
        j = scan::skip_command_space(s, j);
        for (int k = 0; k < 2 && j < s.size() && s[j] == '['; ++k) {
            auto close = scan::match_bracket(s, j);
            if (!close) return std::string_view::npos;
            j = scan::skip_command_space(s, *close + 1);
        }
        return j < s.size() && s[j] == '{' ? j : std::string_view::npos;
    }

    std::size_t command(std::string_view s, std::size_t i, std::string& out) {
        const std::size_t n = s.size();
        if (i + 1 >= n) {
            out.push_back('\\');
            return i + 1;
        }
        const char next = s[i + 1];
        if (!scan::is_letter(next)) {
            if (next == '(') return delimited_math(s, i, "\\)", out);
            if (next == '[') return delimited_math(s, i, "\\]", out);
            out.append(s.substr(i, 2));
            return i + 2;
        }
        const auto name = scan::command_name(s, i + 1);
        const std::size_t after = i + 1 + name.size();

        if (name == "begin") {
            if (auto env = scan::env_name(s, after)) {
                if (scan::is_verbatim_env(env->name) || scan::is_math_env(env->name)) {
                    auto end = scan::find_literal_end(s, env->next, env->name);
                    if (end == std::string_view::npos) {
                        note("unmatched_environment", s.substr(i));
                        out.append(s.substr(i, env->next - i));
                        return env->next;
                    }
                    const std::size_t stop = scan::env_name(s, end + 4)->next;
                    if (scan::is_verbatim_env(env->name)) {
                        out.append(s.substr(i, stop - i));
                    } else {
                        copy_math(s, i, stop, out);
                    }
                    return stop;
                }
            }
        } else if (name == "verb") {
            std::size_t d = after;
            if (d < n && s[d] == '*') ++d;
            if (d < n && !scan::is_letter(s[d]) && !text::is_space(s[d])) {
                auto close = s.find(s[d], d + 1);
                auto nl = s.find('\n', d + 1);
                if (close != std::string_view::npos && close < nl) {
                    out.append(s.substr(i, close + 1 - i));
                    return close + 1;
                }
            }
        }

        const bool removing = remove_.contains(std::string(name));
        const bool unwrapping = !removing && unwrap_.contains(std::string(name));
        if (!removing && !unwrapping) {
            out.append(s.substr(i, after - i));
            return after;
        }
        if (auto arg = scan::command_argument(s, after)) {
            if (unwrapping) out += run(s.substr(arg->begin, arg->end - arg->begin));
            return arg->next;
        }
        const std::size_t open = argument_open(s, after);
        if (open != std::string_view::npos && removing) {
            // Unterminated argument: drop through the end of its first line.
            note("unbalanced_argument", s.substr(i));
            return scan::comment_end(s, open);
        }
        note("missing_argument", s.substr(i));
        out.append(s.substr(i, after - i));
        return after;
    }

    bool strip_;
    std::set<std::string> remove_;
    std::set<std::string> unwrap_;
    Diagnostics* diag_;
};

}  // namespace

std::string normalize(std::string_view text, const NormalizationPolicy& policy, Diagnostics* diag) {
    policy.validate();
    return Normalizer(policy, diag).run(text);
}

// ---------------------------------------------------------------------------
// structure

namespace {

bool is_figure_env(std::string_view e) { return e == "figure" || e == "figure*" || e == "wrapfigure"; }
bool is_table_env(std::string_view e) { return e == "table" || e == "table*" || e == "wraptable"; }

struct EnvEnd {
    std::size_t end_cmd = 0;  // index of "\end"
    std::size_t next = 0;     // index after "\end{env}"
};

// Matching \end{env} for a \begin{env} whose name ends at `from`, counting nested
// occurrences of the same environment and skipping comments and verbatim blocks.
std::optional<EnvEnd> find_env_end(std::string_view s, std::size_t from, std::string_view env) {
    int depth = 1;
    std::size_t i = from;
    while (i < s.size()) {
        if (s[i] == '%') {
            i = scan::comment_end(s, i);
            continue;
        }
        if (s[i] != '\\' || i + 1 >= s.size()) {
            ++i;
            continue;
        }
        if (!scan::is_letter(s[i + 1])) {
            i += 2;
            continue;
        }
        auto name = scan::command_name(s, i + 1);
        std::size_t after = i + 1 + name.size();
        if (name == "begin" || name == "end") {
            if (auto e = scan::env_name(s, after)) {
                if (name == "begin" && scan::is_verbatim_env(e->name)) {
                    auto stop = scan::find_literal_end(s, e->next, e->name);
                    i = stop == std::string_view::npos ? s.size() : stop + 4;
                    continue;
                }
                if (e->name == env) {
                    depth += name == "begin" ? 1 : -1;
                    if (depth == 0) return EnvEnd{i, e->next};
                }
                i = e->next;
                continue;
            }
        }
        i = after;
    }
    return std::nullopt;
}

// Calls visit(name, pos, after) for every control word outside comments and
// verbatim blocks in `s`. visit returns the position to resume from.
template <class Visit>
void walk_commands(std::string_view s, Visit&& visit) {
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '%') {
            i = scan::comment_end(s, i);
            continue;
        }
        if (s[i] != '\\' || i + 1 >= s.size()) {
            ++i;
            continue;
        }
        if (!scan::is_letter(s[i + 1])) {
            i += 2;
            continue;
        }
        auto name = scan::command_name(s, i + 1);
        std::size_t after = i + 1 + name.size();
        if (name == "begin") {
            if (auto e = scan::env_name(s, after); e && scan::is_verbatim_env(e->name)) {
                auto stop = scan::find_literal_end(s, e->next, e->name);
                i = stop == std::string_view::npos ? s.size() : stop + 4;
                continue;
            }
        }
        i = visit(name, i, after);
    }
}

struct RawFigure {
    std::size_t anchor = 0;
    std::string_view body;
};

struct RawScan {
    std::vector<RawFigure> figures;
    std::vector<TableBlock> tables;
    std::vector<Section> sections;
};

RawScan scan_document(std::string_view s, Diagnostics* diag) {
    RawScan out;
    walk_commands(s, [&](std::string_view name, std::size_t pos, std::size_t after) -> std::size_t {
        if (name == "begin") {
            auto env = scan::env_name(s, after);
            if (!env) return after;
            const bool fig = is_figure_env(env->name);
            const bool tab = is_table_env(env->name);
            if (!fig && !tab) return env->next;
            auto end = find_env_end(s, env->next, env->name);
            if (!end) {
                if (diag) diag->add("unmatched_environment", std::string(env->name) + " at " + std::to_string(pos));
                return env->next;
            }
            if (fig) {
                out.figures.push_back({pos, s.substr(env->next, end->end_cmd - env->next)});
            } else {
                out.tables.push_back({std::string(s.substr(pos, end->next - pos)), pos});
            }
            return end->next;
        }
        if (name == "section" || name == "subsection") {
            auto arg = scan::command_argument(s, after, 1);
            if (!arg) return after;
            Section sec;
            sec.level = name == "section" ? 1 : 2;
            sec.title = std::string(text::trim(s.substr(arg->begin, arg->end - arg->begin)));
            sec.begin = pos;
            out.sections.push_back(std::move(sec));
            return arg->next;
        }
        return after;
    });
    for (std::size_t k = 0; k < out.sections.size(); ++k)
        out.sections[k].end = k + 1 < out.sections.size() ? out.sections[k + 1].begin : s.size();
    return out;
}

FigureBlock parse_figure(const RawFigure& raw, Diagnostics* diag) {
    FigureBlock fig;
    fig.anchor = raw.anchor;
    bool have_caption = false;
    walk_commands(raw.body, [&](std::string_view name, std::size_t, std::size_t after) -> std::size_t {
        if (name == "caption") {
            auto arg = scan::command_argument(raw.body, after, 1);
            if (!arg) return after;
            if (have_caption) {
                if (diag) diag->add("multiple_captions", "figure at " + std::to_string(raw.anchor));
            } else {
                fig.caption = std::string(text::trim(raw.body.substr(arg->begin, arg->end - arg->begin)));
                have_caption = true;
            }
            return arg->next;
        }
        if (name == "includegraphics") {
            auto arg = scan::command_argument(raw.body, after, 1);
            if (!arg) return after;
            auto ref = text::trim(raw.body.substr(arg->begin, arg->end - arg->begin));
            if (!ref.empty()) fig.asset_refs.emplace_back(ref);
            return arg->next;
        }
        return after;
    });
    fig.synthetic = fig.asset_refs.empty();
    return fig;
}

std::optional<std::string> first_label(std::string_view body) {
    std::optional<std::string> label;
    walk_commands(body, [&](std::string_view name, std::size_t, std::size_t after) -> std::size_t {
        if (name != "label" || label) return after;
        auto arg = scan::command_argument(body, after, 0);
        if (!arg) return after;
        label = std::string(text::trim(body.substr(arg->begin, arg->end - arg->begin)));
        return arg->next;
    });
    return label;
}

}  // namespace

DocumentStructure extract_structure(const FlatSource& flat, std::string_view normalized, Diagnostics* diag) {
    DocumentStructure doc;
    RawScan scanned = scan_document(normalized, diag);
    doc.sections = std::move(scanned.sections);
    doc.tables = std::move(scanned.tables);
    for (const auto& raw : scanned.figures) doc.figures.push_back(parse_figure(raw, diag));

    RawScan source = scan_document(flat.text, nullptr);
    if (source.figures.size() == doc.figures.size()) {
        for (std::size_t k = 0; k < doc.figures.size(); ++k) doc.figures[k].label = first_label(source.figures[k].body);
    } else if (diag) {
        diag->add("figure_count_mismatch", std::to_string(source.figures.size()) + " in source vs " +
                                               std::to_string(doc.figures.size()) + " normalized");
    }
    return doc;
}

}  // namespace texdr::latex
