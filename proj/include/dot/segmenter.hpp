#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dot/corpus.hpp"

namespace dot {

/// Concrete marker spellings. Each belongs to one family
/// (numbered, labeled, bulleted).
enum class MarkerStyle {
    NumberDot,       // "1."
    NumberParen,     // "1)"
    NumberEnclosed,  // "(1)"
    StepLabel,       // "Step 1:"
    Dash,            // "- "
    Asterisk,        // "* "
    Bullet,          // U+2022
};

SegmentationMode family_of(MarkerStyle style);
const char* to_string(MarkerStyle style);
MarkerStyle parse_marker_style(std::string_view s);

struct SegmentationRules {
    /// Families are tried in the order their first style appears here.
    std::vector<MarkerStyle> marker_patterns = default_marker_patterns();
    /// A step whose marker plus content has fewer visible code points is
    /// folded into its neighbour.
    int min_step_chars = 3;
    bool allow_paragraph_fallback = true;

    static std::vector<MarkerStyle> default_marker_patterns();
    void validate() const;
};

struct Segmentation {
    std::vector<Step> steps;
    SegmentationMode mode = SegmentationMode::ParagraphFallback;
    Confidence confidence = Confidence::Low;
};

/// Splits a teacher trace into steps.
///
/// Numbered and bulleted markers count only at the start of a line and only
/// at the outermost indentation level; "Step N:" labels count anywhere at a
/// word boundary. Markers inside backtick code or $...$ / $$...$$ math are
/// ignored. Text before the first marker is folded into step 1. Confidence
/// is high only for numbered/labeled traces whose markers read 1, 2, ..., k.
///
/// Throws EmptyTrace for blank input and NoMarkers when nothing matches and
/// the paragraph fallback is disabled.
Segmentation segment(std::string_view raw_text, const SegmentationRules& rules = {});

/// Segments raw_text and fills in tok.
Trace make_trace(std::string example_id, std::string teacher_id, std::string raw_text,
                 const SegmentationRules& rules = {});

/// Seeded spot-check sample: every low-confidence trace first, then a
/// uniform draw from the rest until ceil(fraction * n) traces are chosen.
/// Both groups keep input order. fraction must lie in (0, 1].
std::vector<Trace> audit_sample(std::span<const Trace> traces, double fraction, std::uint64_t seed);

/// Count of non-whitespace code points.
std::size_t visible_length(std::string_view text);

}  // namespace dot
