#include "dot/segmenter.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>

#include "dot/rng.hpp"

namespace dot {

SegmentationMode family_of(MarkerStyle style) {
    switch (style) {
    case MarkerStyle::NumberDot:
    case MarkerStyle::NumberParen:
    case MarkerStyle::NumberEnclosed:
        return SegmentationMode::Numbered;
    case MarkerStyle::StepLabel:
        return SegmentationMode::Labeled;
    case MarkerStyle::Dash:
    case MarkerStyle::Asterisk:
    case MarkerStyle::Bullet:
        return SegmentationMode::Bulleted;
    }
    return SegmentationMode::ParagraphFallback;
}

const char* to_string(MarkerStyle style) {
    switch (style) {
    case MarkerStyle::NumberDot: return "number-dot";
    case MarkerStyle::NumberParen: return "number-paren";
    case MarkerStyle::NumberEnclosed: return "number-enclosed";
    case MarkerStyle::StepLabel: return "step-label";
    case MarkerStyle::Dash: return "dash";
    case MarkerStyle::Asterisk: return "asterisk";
    case MarkerStyle::Bullet: return "bullet";
    }
    return "?";
}

MarkerStyle parse_marker_style(std::string_view s) {
    for (auto style : {MarkerStyle::NumberDot, MarkerStyle::NumberParen, MarkerStyle::NumberEnclosed,
                       MarkerStyle::StepLabel, MarkerStyle::Dash, MarkerStyle::Asterisk,
                       MarkerStyle::Bullet}) {
        if (s == to_string(style)) return style;
    }
    throw Error(ErrorKind::Parameter, "unknown marker pattern '" + std::string(s) + "'");
}

std::vector<MarkerStyle> SegmentationRules::default_marker_patterns() {
    return {MarkerStyle::StepLabel, MarkerStyle::NumberDot, MarkerStyle::NumberParen,
            MarkerStyle::NumberEnclosed, MarkerStyle::Dash, MarkerStyle::Asterisk,
            MarkerStyle::Bullet};
}

void SegmentationRules::validate() const {
    if (marker_patterns.empty()) throw Error(ErrorKind::Parameter, "marker pattern list is empty");
    if (min_step_chars < 1) throw Error(ErrorKind::Parameter, "min_step_chars must be >= 1");
}

std::size_t visible_length(std::string_view text) {
    std::size_t n = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        std::size_t len = b0 < 0x80 ? 1 : (b0 & 0xE0) == 0xC0 ? 2 : (b0 & 0xF0) == 0xE0 ? 3 : (b0 & 0xF8) == 0xF0 ? 4 : 1;
        if (i + len > text.size()) len = 1;
        char32_t cp = b0;
        if (len > 1) {
            cp = b0 & (0xFF >> (len + 1));
            for (std::size_t j = 1; j < len; ++j) cp = (cp << 6) | (static_cast<unsigned char>(text[i + j]) & 0x3F);
        }
        if (!is_unicode_space(cp)) ++n;
        i += len;
    }
    return n;
}

namespace {

struct Marker {
    std::size_t start = 0;  // first byte of the marker
    std::size_t end = 0;    // one past the marker's last byte
    int number = 0;         // 0 for bullets
    int indent = 0;
    MarkerStyle style = MarkerStyle::NumberDot;
};

bool is_blank(char c) { return c == ' ' || c == '\t'; }
bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_ws(s[b])) ++b;
    while (e > b && is_ws(s[e - 1])) --e;
    return s.substr(b, e - b);
}

// Byte mask of regions where markers are not recognised: fenced and inline
// code, $$...$$ display math and single-line $...$ inline math.
std::vector<bool> protected_mask(std::string_view text) {
    std::vector<bool> mask(text.size(), false);
    auto mark = [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e && i < mask.size(); ++i) mask[i] = true;
    };
    std::size_t i = 0;
    while (i < text.size()) {
        if (text.compare(i, 3, "```") == 0) {
            const auto close = text.find("```", i + 3);
            const auto end = close == std::string_view::npos ? text.size() : close + 3;
            mark(i, end);
            i = end;
        } else if (text[i] == '`') {
            const auto eol = text.find('\n', i + 1);
            const auto close = text.find('`', i + 1);
            if (close != std::string_view::npos && (eol == std::string_view::npos || close < eol)) {
                mark(i, close + 1);
                i = close + 1;
            } else {
                ++i;
            }
        } else if (text[i] == '\\' && i + 1 < text.size()) {
            i += 2;
        } else if (text.compare(i, 2, "$$") == 0) {
            const auto close = text.find("$$", i + 2);
            if (close != std::string_view::npos) {
                mark(i, close + 2);
                i = close + 2;
            } else {
                i += 2;
            }
        } else if (text[i] == '$') {
            std::size_t j = i + 1;
            while (j < text.size() && text[j] != '\n' && !(text[j] == '$' && text[j - 1] != '\\')) ++j;
            if (j < text.size() && text[j] == '$') {
                mark(i, j + 1);
                i = j + 1;
            } else {
                ++i;
            }
        } else {
            ++i;
        }
    }
    return mask;
}

std::optional<int> read_number(std::string_view s, std::size_t& p) {
    const std::size_t b = p;
    while (p < s.size() && p - b < 4 && std::isdigit(static_cast<unsigned char>(s[p]))) ++p;
    if (p == b || p - b > 3) {
        p = b;
        return std::nullopt;
    }
    return std::stoi(std::string(s.substr(b, p - b)));
}

bool boundary_after(std::string_view s, std::size_t p) { return p >= s.size() || is_ws(s[p]); }

bool iequals_at(std::string_view s, std::size_t p, std::string_view word) {
    if (p + word.size() > s.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[p + i])) != word[i]) return false;
    }
    return true;
}

// Line-start markers of the numbered and bulleted families.
std::optional<Marker> line_marker(std::string_view text, std::size_t line_start, std::size_t line_end) {
    std::size_t p = line_start;
    int indent = 0;
    while (p < line_end && is_blank(text[p])) {
        indent += text[p] == '\t' ? 4 : 1;
        ++p;
    }
    if (p >= line_end) return std::nullopt;
    const std::string_view line = text.substr(0, line_end);
    Marker m;
    m.start = p;
    m.indent = indent;

    if (line[p] == '(') {
        std::size_t q = p + 1;
        if (auto n = read_number(line, q); n && q < line.size() && line[q] == ')' && boundary_after(line, q + 1)) {
            m.number = *n;
            m.end = q + 1;
            m.style = MarkerStyle::NumberEnclosed;
            return m;
        }
        return std::nullopt;
    }
    if (std::isdigit(static_cast<unsigned char>(line[p]))) {
        std::size_t q = p;
        auto n = read_number(line, q);
        if (!n || q >= line.size()) return std::nullopt;
        if ((line[q] == '.' || line[q] == ')') && boundary_after(line, q + 1)) {
            m.number = *n;
            m.end = q + 1;
            m.style = line[q] == '.' ? MarkerStyle::NumberDot : MarkerStyle::NumberParen;
            return m;
        }
        return std::nullopt;
    }
    if ((line[p] == '-' || line[p] == '*') && p + 1 < line.size() && is_blank(line[p + 1])) {
        m.end = p + 1;
        m.style = line[p] == '-' ? MarkerStyle::Dash : MarkerStyle::Asterisk;
        return m;
    }
    if (line.compare(p, 3, "\xE2\x80\xA2") == 0 && boundary_after(line, p + 3)) {
        m.end = p + 3;
        m.style = MarkerStyle::Bullet;
        return m;
    }
    return std::nullopt;
}

// "Step N:" anywhere at a word boundary, optionally wrapped in **. At line
// start (after an optional markdown heading) "Step N." and "Step N)" are
// accepted too, and the heading becomes part of the marker.
void label_markers(std::string_view text, std::size_t line_start, std::size_t line_end,
                   std::vector<Marker>& out) {
    const std::string_view line = text.substr(0, line_end);
    std::size_t first = line_start;
    while (first < line_end && is_blank(text[first])) ++first;
    std::size_t after_heading = first;
    if (after_heading < line_end && text[after_heading] == '#') {
        while (after_heading < line_end && text[after_heading] == '#') ++after_heading;
        while (after_heading < line_end && is_blank(text[after_heading])) ++after_heading;
    }

    std::size_t p = line_start;
    while (p < line_end) {
        if (p > line_start && !is_ws(text[p - 1])) {
            ++p;
            continue;
        }
        std::size_t q = p;
        if (line.compare(q, 2, "**") == 0) q += 2;
        if (!iequals_at(line, q, "step") || q + 4 >= line_end || !is_blank(text[q + 4])) {
            ++p;
            continue;
        }
        q += 4;
        while (q < line_end && is_blank(text[q])) ++q;
        const auto n = read_number(line, q);
        const bool at_line_start = p == first || p == after_heading;
        const bool sep_ok = n && q < line_end &&
                            (text[q] == ':' || (at_line_start && (text[q] == '.' || text[q] == ')')));
        if (!sep_ok) {
            ++p;
            continue;
        }
        ++q;
        if (line.compare(q, 2, "**") == 0) q += 2;
        if (!boundary_after(line, q)) {
            ++p;
            continue;
        }
        Marker m;
        m.start = at_line_start ? first : p;
        m.end = q;
        m.number = *n;
        m.style = MarkerStyle::StepLabel;
        out.push_back(m);
        p = q;
    }
}

std::vector<Marker> find_markers(std::string_view text, const std::vector<bool>& mask) {
    std::vector<Marker> out;
    std::size_t line_start = 0;
    while (line_start <= text.size()) {
        auto line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = text.size();
        std::vector<Marker> found;
        if (auto m = line_marker(text, line_start, line_end)) found.push_back(*m);
        label_markers(text, line_start, line_end, found);
        for (auto& m : found) {
            if (!mask[m.start]) out.push_back(m);
        }
        if (line_end == text.size()) break;
        line_start = line_end + 1;
    }
    return out;
}

// Markers of `family` that count as top-level steps.
std::vector<Marker> top_level(const std::vector<Marker>& all, SegmentationMode family,
                              const std::vector<MarkerStyle>& allowed) {
    std::vector<Marker> cands;
    for (const auto& m : all) {
        if (family_of(m.style) == family &&
            std::find(allowed.begin(), allowed.end(), m.style) != allowed.end())
            cands.push_back(m);
    }
    if (cands.empty() || family == SegmentationMode::Labeled) return cands;
    int min_indent = cands.front().indent;
    for (const auto& m : cands) min_indent = std::min(min_indent, m.indent);
    std::optional<MarkerStyle> style;
    std::vector<Marker> top;
    for (const auto& m : cands) {
        if (m.indent > min_indent + 1) continue;
        if (!style) style = m.style;
        if (m.style == *style) top.push_back(m);
    }
    return top;
}

struct Piece {
    std::size_t marker_len = 0;  // visible code points of the marker
    std::string content;
};

// Folds micro-steps into the preceding piece (or the following one for the
// first piece) and renumbers.
std::vector<Step> merge_micro(std::vector<Piece> pieces, int min_chars) {
    auto join = [](std::string a, const std::string& b) {
        if (a.empty()) return b;
        if (b.empty()) return a;
        return a + "\n" + b;
    };
    auto small = [&](const Piece& p) {
        return p.content.empty() ||
               p.marker_len + visible_length(p.content) < static_cast<std::size_t>(min_chars);
    };
    std::vector<Piece> kept;
    std::string carry;  // leading micro-steps waiting for a successor
    for (auto& p : pieces) {
        if (small(p)) {
            if (!kept.empty()) kept.back().content = join(kept.back().content, p.content);
            else carry = join(carry, p.content);
            continue;
        }
        p.content = join(carry, p.content);
        carry.clear();
        kept.push_back(std::move(p));
    }
    if (kept.empty()) {
        if (carry.empty()) return {};
        kept.push_back({0, carry});
    }
    std::vector<Step> steps;
    steps.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i)
        steps.push_back({static_cast<int>(i + 1), std::move(kept[i].content)});
    return steps;
}

std::vector<Step> split_at_markers(std::string_view text, const std::vector<Marker>& top, int min_chars) {
    std::vector<Piece> pieces;
    const std::string preamble(trim(text.substr(0, top.front().start)));
    for (std::size_t i = 0; i < top.size(); ++i) {
        const auto end = i + 1 < top.size() ? top[i + 1].start : text.size();
        Piece p;
        p.marker_len = visible_length(text.substr(top[i].start, top[i].end - top[i].start));
        p.content = std::string(trim(text.substr(top[i].end, end - top[i].end)));
        pieces.push_back(std::move(p));
    }
    if (!preamble.empty()) {
        auto& first = pieces.front().content;
        first = first.empty() ? preamble : preamble + "\n" + first;
    }
    return merge_micro(std::move(pieces), min_chars);
}

std::vector<Step> split_paragraphs(std::string_view text, const std::vector<bool>& mask, int min_chars) {
    std::vector<Piece> pieces;
    std::size_t para_start = 0;
    std::size_t line_start = 0;
    auto flush = [&](std::size_t end) {
        auto chunk = trim(text.substr(para_start, end - para_start));
        if (!chunk.empty()) pieces.push_back({0, std::string(chunk)});
    };
    while (line_start < text.size()) {
        auto line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = text.size();
        const bool blank = trim(text.substr(line_start, line_end - line_start)).empty();
        if (blank && !mask[line_start]) {
            flush(line_start);
            para_start = line_end;
        }
        line_start = line_end + 1;
    }
    flush(text.size());
    return merge_micro(std::move(pieces), min_chars);
}

bool consecutive_from_one(const std::vector<Marker>& top) {
    for (std::size_t i = 0; i < top.size(); ++i) {
        if (top[i].number != static_cast<int>(i + 1)) return false;
    }
    return true;
}

}  // namespace

Segmentation segment(std::string_view raw_text, const SegmentationRules& rules) {
    rules.validate();
    if (trim(raw_text).empty()) throw Error(ErrorKind::EmptyTrace, "trace is empty or whitespace-only");

    const auto mask = protected_mask(raw_text);
    const auto markers = find_markers(raw_text, mask);

    std::vector<SegmentationMode> families;
    for (auto style : rules.marker_patterns) {
        const auto f = family_of(style);
        if (std::find(families.begin(), families.end(), f) == families.end()) families.push_back(f);
    }

    for (auto family : families) {
        const auto top = top_level(markers, family, rules.marker_patterns);
        const std::size_t needed = family == SegmentationMode::Bulleted ? 2 : 1;
        if (top.size() < needed) continue;
        auto steps = split_at_markers(raw_text, top, rules.min_step_chars);
        if (steps.empty()) continue;
        Segmentation out;
        out.steps = std::move(steps);
        out.mode = family;
        out.confidence = family != SegmentationMode::Bulleted && consecutive_from_one(top)
                             ? Confidence::High
                             : Confidence::Low;
        return out;
    }

    if (!rules.allow_paragraph_fallback)
        throw Error(ErrorKind::NoMarkers, "no step markers found and paragraph fallback is disabled");
    Segmentation out;
    out.steps = split_paragraphs(raw_text, mask, rules.min_step_chars);
    out.mode = SegmentationMode::ParagraphFallback;
    out.confidence = Confidence::Low;
    return out;
}

Trace make_trace(std::string example_id, std::string teacher_id, std::string raw_text,
                 const SegmentationRules& rules) {
    auto seg = segment(raw_text, rules);
    Trace t;
    t.example_id = std::move(example_id);
    t.teacher_id = std::move(teacher_id);
    t.tok = static_cast<std::int64_t>(count_tokens(raw_text));
    t.raw_text = std::move(raw_text);
    t.steps = std::move(seg.steps);
    t.segmentation_mode = seg.mode;
    t.confidence = seg.confidence;
    return t;
}

std::vector<Trace> audit_sample(std::span<const Trace> traces, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw Error(ErrorKind::Parameter, "audit fraction must lie in (0, 1]");
    if (traces.empty()) throw Error(ErrorKind::Parameter, "no traces to audit");

    const auto n = traces.size();
    // Guard against 0.2 * 10 landing a hair above 2.
    const auto target = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));

    std::vector<std::size_t> low;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < n; ++i)
        (traces[i].confidence == Confidence::Low ? low : rest).push_back(i);

    std::vector<Trace> out;
    for (auto i : low) out.push_back(traces[i]);
    if (out.size() >= target) return out;

    Rng rng(seed);
    auto picked = rng.sample_indices(rest.size(), std::min(rest.size(), target - out.size()));
    std::sort(picked.begin(), picked.end());
    for (auto j : picked) out.push_back(traces[rest[j]]);
    return out;
}

}  // namespace dot
