#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "velo/dataset.hpp"
#include "velo/util.hpp"

namespace velo::dataset {

namespace {

// Tolerant, hand-rolled extraction for saved Codeforces-style problem pages.
// The goal is text recovery, not HTML conformance: unknown markup degrades to
// plain text and nothing ever throws except the two required missing-section
// errors.

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

std::string decode_entities(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '&') {
            out += text[i++];
            continue;
        }
        std::size_t semi = text.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out += text[i++];
            continue;
        }
        std::string_view name = text.substr(i + 1, semi - i - 1);
        if (name == "lt") out += '<';
        else if (name == "gt") out += '>';
        else if (name == "amp") out += '&';
        else if (name == "quot") out += '"';
        else if (name == "apos") out += '\'';
        else if (name == "nbsp") out += ' ';
        else if (!name.empty() && name[0] == '#') {
            long code = 0;
            bool ok = true;
            if (name.size() > 1 && (name[1] == 'x' || name[1] == 'X')) {
                for (char c : name.substr(2)) {
                    if (!std::isxdigit(static_cast<unsigned char>(c))) { ok = false; break; }
                    code = code * 16 + (std::isdigit(static_cast<unsigned char>(c))
                                            ? c - '0'
                                            : std::tolower(static_cast<unsigned char>(c)) - 'a' + 10);
                }
            } else {
                for (char c : name.substr(1)) {
                    if (!std::isdigit(static_cast<unsigned char>(c))) { ok = false; break; }
                    code = code * 10 + (c - '0');
                }
            }
            if (ok && code > 0 && code < 128) out += static_cast<char>(code);
            else if (ok) out += ' ';  // non-ASCII entities flatten to a space
            else { out += text[i]; ++i; continue; }
        } else {
            out += text[i++];
            continue;
        }
        i = semi + 1;
    }
    return out;
}

struct Tag {
    std::string_view name;   // lowercased? no: raw; compare case-insensitively
    bool closing = false;
    bool self_closing = false;
    std::size_t begin = 0;   // position of '<'
    std::size_t end = 0;     // one past '>'
    std::string_view raw;    // full tag text including brackets
};

std::optional<Tag> next_tag(std::string_view html, std::size_t from) {
    std::size_t lt = html.find('<', from);
    if (lt == std::string_view::npos) return std::nullopt;
    std::size_t gt = html.find('>', lt + 1);
    if (gt == std::string_view::npos) return std::nullopt;
    Tag tag;
    tag.begin = lt;
    tag.end = gt + 1;
    tag.raw = html.substr(lt, gt - lt + 1);
    std::size_t p = lt + 1;
    if (p < gt && html[p] == '/') {
        tag.closing = true;
        ++p;
    }
    std::size_t name_start = p;
    while (p < gt && (std::isalnum(static_cast<unsigned char>(html[p])) || html[p] == '-')) ++p;
    tag.name = html.substr(name_start, p - name_start);
    if (gt > lt + 1 && html[gt - 1] == '/') tag.self_closing = true;
    return tag;
}

bool tag_has_class(const Tag& tag, std::string_view class_name) {
    // look for class="... name ..." inside the raw tag, whole-token match
    std::string_view raw = tag.raw;
    std::size_t attr = raw.find("class=");
    if (attr == std::string_view::npos) return false;
    std::size_t q1 = attr + 6;
    if (q1 >= raw.size()) return false;
    char quote = raw[q1];
    if (quote != '"' && quote != '\'') return false;
    std::size_t q2 = raw.find(quote, q1 + 1);
    if (q2 == std::string_view::npos) return false;
    std::string_view classes = raw.substr(q1 + 1, q2 - q1 - 1);
    for (auto token : tokenize(classes))
        if (token == class_name) return true;
    return false;
}

struct Block {
    std::size_t outer_begin = 0;  // '<' of the opening tag
    std::size_t inner_begin = 0;  // one past the opening tag
    std::size_t inner_end = 0;    // '<' of the matching close (or end of input)
    std::size_t outer_end = 0;    // one past the matching close
};

/// Finds the first element of `tag_name` carrying `class_name` at or after
/// `from`, with nesting-aware close matching. Unclosed elements run to the
/// end of the document.
std::optional<Block> find_block(std::string_view html, std::string_view tag_name,
                                std::string_view class_name, std::size_t from = 0) {
    std::size_t pos = from;
    while (true) {
        auto tag = next_tag(html, pos);
        if (!tag) return std::nullopt;
        pos = tag->end;
        if (tag->closing || !iequals(tag->name, tag_name) || !tag_has_class(*tag, class_name))
            continue;
        Block block;
        block.outer_begin = tag->begin;
        block.inner_begin = tag->end;
        if (tag->self_closing) {
            block.inner_end = tag->end;
            block.outer_end = tag->end;
            return block;
        }
        int depth = 1;
        std::size_t scan = tag->end;
        while (depth > 0) {
            auto inner = next_tag(html, scan);
            if (!inner) {
                block.inner_end = html.size();
                block.outer_end = html.size();
                return block;
            }
            scan = inner->end;
            if (!iequals(inner->name, tag_name)) continue;
            if (inner->closing) {
                --depth;
                if (depth == 0) {
                    block.inner_end = inner->begin;
                    block.outer_end = inner->end;
                }
            } else if (!inner->self_closing) {
                ++depth;
            }
        }
        return block;
    }
}

/// Markup-to-text: tags vanish, block boundaries become newlines, scripts and
/// styles are dropped whole, entities are decoded.
std::string strip_tags(std::string_view html) {
    std::string out;
    out.reserve(html.size());
    std::size_t pos = 0;
    auto append_newline = [&out] {
        if (!out.empty() && out.back() != '\n') out += '\n';
    };
    while (pos < html.size()) {
        auto tag = next_tag(html, pos);
        std::size_t text_end = tag ? tag->begin : html.size();
        out += decode_entities(html.substr(pos, text_end - pos));
        if (!tag) break;
        pos = tag->end;
        if (!tag->closing && (iequals(tag->name, "script") || iequals(tag->name, "style"))) {
            // skip to the matching close, if any
            while (true) {
                auto close = next_tag(html, pos);
                if (!close) { pos = html.size(); break; }
                pos = close->end;
                if (close->closing && iequals(close->name, tag->name)) break;
            }
            continue;
        }
        if (iequals(tag->name, "br")) append_newline();
        else if (tag->closing &&
                 (iequals(tag->name, "p") || iequals(tag->name, "div") ||
                  iequals(tag->name, "li") || iequals(tag->name, "pre") ||
                  iequals(tag->name, "ul") || iequals(tag->name, "ol")))
            append_newline();
    }
    return out;
}

std::string squeeze_text(std::string text) {
    // normalize CRLF, trim trailing space per line, cap blank runs at one
    std::string out;
    out.reserve(text.size());
    std::string line;
    int blank_run = 0;
    auto flush_line = [&] {
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
            line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) {
            ++blank_run;
            line.clear();
            return;
        }
        if (!out.empty() && blank_run > 0) out += '\n';
        blank_run = 0;
        out.append(line, start, line.size() - start);
        out += '\n';
        line.clear();
    };
    for (char c : text) {
        if (c == '\n') flush_line();
        else line += c;
    }
    flush_line();
    while (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

/// Pre-formatted blocks keep their line structure; per-line wrapper divs
/// (test-example-line) each contribute one line.
std::string pre_text(std::string_view html) {
    std::string text = strip_tags(html);
    // normalize newlines, drop trailing blank lines, keep interior ones
    std::string out;
    std::string line;
    std::vector<std::string> lines;
    for (char c : text) {
        if (c == '\r') continue;
        if (c == '\n') {
            lines.push_back(line);
            line.clear();
        } else {
            line += c;
        }
    }
    if (!line.empty()) lines.push_back(line);
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

std::string section_text(std::string_view html, const Block& block) {
    std::string_view inner = html.substr(block.inner_begin, block.inner_end - block.inner_begin);
    std::string owned(inner);
    // drop the section-title caption if present
    if (auto title = find_block(owned, "div", "section-title")) {
        owned.erase(title->outer_begin, title->outer_end - title->outer_begin);
    }
    return squeeze_text(strip_tags(owned));
}

/// Content of the first <pre> element, or empty when there is none.
std::string first_pre_content(std::string_view html) {
    std::size_t scan = 0;
    while (true) {
        auto tag = next_tag(html, scan);
        if (!tag) return {};
        scan = tag->end;
        if (tag->closing || !iequals(tag->name, "pre")) continue;
        std::size_t close = scan;
        std::size_t content_end = html.size();
        while (true) {
            auto inner = next_tag(html, close);
            if (!inner) break;
            close = inner->end;
            if (inner->closing && iequals(inner->name, "pre")) {
                content_end = inner->begin;
                break;
            }
        }
        return std::string(html.substr(scan, content_end - scan));
    }
}

int parse_time_limit_ms(std::string_view text) {
    // e.g. "time limit per test2 seconds", "1 second", "1.5 seconds"
    std::size_t i = 0;
    while (i < text.size() && !std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i == text.size()) return 0;
    double seconds = 0.0;
    std::size_t start = i;
    while (i < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.'))
        ++i;
    try {
        seconds = std::stod(std::string(text.substr(start, i - start)));
    } catch (...) {
        return 0;
    }
    std::string_view rest = text.substr(i);
    if (rest.find("second") == std::string_view::npos &&
        rest.find(" s") == std::string_view::npos && !rest.empty() && rest[0] != 's')
        return 0;
    if (seconds <= 0.0 || seconds > 600.0) return 0;
    return static_cast<int>(seconds * 1000.0 + 0.5);
}

}  // namespace

ParsedStatement parse_problem_html(std::string_view html) {
    ParsedStatement parsed;

    auto statement = find_block(html, "div", "problem-statement");
    std::string_view scope = statement
        ? html.substr(statement->inner_begin, statement->inner_end - statement->inner_begin)
        : html;

    if (auto limit = find_block(scope, "div", "time-limit")) {
        parsed.time_limit_ms = parse_time_limit_ms(
            strip_tags(scope.substr(limit->inner_begin, limit->inner_end - limit->inner_begin)));
    }

    auto input_spec = find_block(scope, "div", "input-specification");
    if (!input_spec) throw DomainError("problem statement is missing section: input_format");
    parsed.input_format = section_text(scope, *input_spec);

    if (auto output_spec = find_block(scope, "div", "output-specification"))
        parsed.output_format = section_text(scope, *output_spec);

    // Description: statement body between the header block and the input
    // specification. Without a header it starts at the top of the statement.
    std::size_t description_begin = 0;
    if (auto header = find_block(scope, "div", "header")) {
        if (header->outer_end <= input_spec->outer_begin) description_begin = header->outer_end;
    }
    parsed.description = squeeze_text(
        strip_tags(scope.substr(description_begin, input_spec->outer_begin - description_begin)));
    if (parsed.description.empty())
        throw DomainError("problem statement is missing section: description");

    if (auto samples = find_block(scope, "div", "sample-tests")) {
        std::string_view sample_scope =
            scope.substr(samples->inner_begin, samples->inner_end - samples->inner_begin);
        std::size_t pos = 0;
        std::vector<std::pair<bool, std::string>> blocks;  // (is_input, text)
        while (true) {
            auto in_block = find_block(sample_scope, "div", "input", pos);
            auto out_block = find_block(sample_scope, "div", "output", pos);
            std::optional<Block> blk;
            bool is_input = false;
            if (in_block && (!out_block || in_block->outer_begin < out_block->outer_begin)) {
                blk = in_block;
                is_input = true;
            } else if (out_block) {
                blk = out_block;
            }
            if (!blk) break;
            std::string owned(
                sample_scope.substr(blk->inner_begin, blk->inner_end - blk->inner_begin));
            std::string pre_content = first_pre_content(owned);
            std::string text = pre_text(pre_content.empty() ? std::string_view(owned)
                                                            : std::string_view(pre_content));
            blocks.emplace_back(is_input, std::move(text));
            pos = blk->outer_end;
        }
        std::string rendered;
        for (std::size_t i = 0; i + 1 < blocks.size(); ++i) {
            if (blocks[i].first && !blocks[i + 1].first) {
                parsed.samples.push_back({blocks[i].second, blocks[i + 1].second});
                rendered += "Input\n" + blocks[i].second + "Output\n" + blocks[i + 1].second;
                ++i;
            }
        }
        parsed.examples = squeeze_text(std::move(rendered));
    }

    if (auto note = find_block(scope, "div", "note")) parsed.notes = section_text(scope, *note);

    std::size_t tag_pos = 0;
    while (auto tag_box = find_block(html, "span", "tag-box", tag_pos)) {
        auto text = squeeze_text(strip_tags(
            html.substr(tag_box->inner_begin, tag_box->inner_end - tag_box->inner_begin)));
        if (!text.empty()) parsed.tags.push_back(text);
        tag_pos = tag_box->outer_end;
    }

    return parsed;
}

}  // namespace velo::dataset
