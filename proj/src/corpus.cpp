#include "dot/corpus.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <regex>
#include <unordered_set>

#include <json.hpp>

namespace dot {

using json = nlohmann::ordered_json;

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::EmptyTrace: return "empty-trace";
    case ErrorKind::NoMarkers: return "no-markers";
    case ErrorKind::InvalidTrace: return "invalid-trace";
    case ErrorKind::Aggregation: return "aggregation";
    case ErrorKind::InvalidScore: return "invalid-score";
    case ErrorKind::Exhaustion: return "exhaustion";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::InsufficientOverlap: return "insufficient-overlap";
    case ErrorKind::Template: return "template";
    case ErrorKind::Io: return "io";
    case ErrorKind::Startup: return "startup";
    case ErrorKind::Http: return "http";
    }
    return "unknown";
}

const char* to_string(SegmentationMode mode) {
    switch (mode) {
    case SegmentationMode::Numbered: return "numbered";
    case SegmentationMode::Labeled: return "labeled";
    case SegmentationMode::Bulleted: return "bulleted";
    case SegmentationMode::ParagraphFallback: return "paragraph-fallback";
    }
    return "paragraph-fallback";
}

const char* to_string(Confidence confidence) {
    return confidence == Confidence::High ? "high" : "low";
}

SegmentationMode parse_segmentation_mode(std::string_view s) {
    if (s == "numbered") return SegmentationMode::Numbered;
    if (s == "labeled") return SegmentationMode::Labeled;
    if (s == "bulleted") return SegmentationMode::Bulleted;
    if (s == "paragraph-fallback") return SegmentationMode::ParagraphFallback;
    throw Error(ErrorKind::Validation, "unknown segmentation_mode '" + std::string(s) + "'");
}

Confidence parse_confidence(std::string_view s) {
    if (s == "high") return Confidence::High;
    if (s == "low") return Confidence::Low;
    throw Error(ErrorKind::Validation, "unknown confidence '" + std::string(s) + "'");
}

bool is_valid_url(std::string_view url) {
    static const std::regex re(R"(^https?://[A-Za-z0-9.\-]+(:[0-9]{1,5})?(/[^\s]*)?$)");
    return std::regex_match(url.begin(), url.end(), re);
}

void validate(const TeacherProfile& p) {
    if (p.teacher_id.empty()) throw Error(ErrorKind::Validation, "teacher_id is empty");
    if (p.samples_per_example < 1)
        throw Error(ErrorKind::Validation, "samples_per_example must be >= 1");
    if (!(p.temperature >= 0.0) || !std::isfinite(p.temperature))
        throw Error(ErrorKind::Validation, "temperature must be a nonnegative real");
    if (!is_valid_url(p.endpoint_url))
        throw Error(ErrorKind::Validation, "endpoint_url is not a valid URL: " + p.endpoint_url);
}

// ---------------------------------------------------------------------------
// tokenizer

bool is_unicode_space(char32_t cp) {
    switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
        return true;
    default:
        return cp >= 0x2000 && cp <= 0x200A;
    }
}

namespace {

// Decodes one code point at i and advances i. Malformed sequences yield
// U+FFFD and consume a single byte.
char32_t next_code_point(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
    else { ++i; return 0xFFFD; }
    if (i + len > s.size()) { ++i; return 0xFFFD; }
    for (int j = 1; j < len; ++j) {
        const auto b = static_cast<unsigned char>(s[i + j]);
        if ((b & 0xC0) != 0x80) { ++i; return 0xFFFD; }
        cp = (cp << 6) | (b & 0x3F);
    }
    i += len;
    return cp;
}

}  // namespace

std::size_t count_tokens(std::string_view text) {
    std::size_t count = 0;
    bool in_token = false;
    std::size_t i = 0;
    while (i < text.size()) {
        const bool space = is_unicode_space(next_code_point(text, i));
        if (!space && !in_token) ++count;
        in_token = !space;
    }
    return count;
}

// ---------------------------------------------------------------------------
// hashing

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorKind::Io, "sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return sha256_hex(bytes);
}

// ---------------------------------------------------------------------------
// line IO

namespace {

struct NumberedLine {
    std::size_t number;
    std::string text;
};

std::vector<NumberedLine> read_numbered_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::vector<NumberedLine> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        out.push_back({n, std::move(line)});
    }
    return out;
}

template <typename T, typename Decode>
std::vector<T> read_records(const std::filesystem::path& path, Decode decode) {
    std::vector<T> out;
    for (auto& [number, text] : read_numbered_lines(path)) {
        try {
            out.push_back(decode(text));
        } catch (const Error& e) {
            throw Error(e.kind(), path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return out;
}

json parse_object(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::Parse, "expected a JSON object");
    return j;
}

const json& require(const json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end() || it->is_null())
        throw Error(ErrorKind::Validation, std::string("missing required field '") + field + "'");
    return *it;
}

std::string get_string(const json& j, const char* field) {
    const json& v = require(j, field);
    if (!v.is_string()) throw Error(ErrorKind::Validation, std::string("field '") + field + "' must be a string");
    return v.get<std::string>();
}

std::int64_t get_int(const json& j, const char* field) {
    const json& v = require(j, field);
    if (!v.is_number_integer())
        throw Error(ErrorKind::Validation, std::string("field '") + field + "' must be an integer");
    return v.get<std::int64_t>();
}

double get_number(const json& v, const char* field) {
    if (!v.is_number()) throw Error(ErrorKind::Validation, std::string("field '") + field + "' must be a number");
    return v.get<double>();
}

}  // namespace

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::vector<std::string> out;
    for (auto& l : read_numbered_lines(path)) out.push_back(std::move(l.text));
    return out;
}

void write_lines(const std::vector<std::string>& lines, const std::filesystem::path& path) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
        for (const auto& l : lines) out << l << '\n';
        out.flush();
        if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorKind::Io, "cannot write " + path.string());
    }
}

// ---------------------------------------------------------------------------
// Example

std::string example_to_json(const Example& e) {
    json j;
    j["id"] = e.id;
    j["task"] = e.task;
    j["prompt"] = e.prompt;
    if (e.reference_answer) j["reference_answer"] = *e.reference_answer;
    if (e.external_difficulty) j["external_difficulty"] = *e.external_difficulty;
    if (e.judge_score) j["judge_score"] = *e.judge_score;
    return j.dump();
}

Example example_from_json(std::string_view line) {
    const json j = parse_object(line);
    Example e;
    e.id = get_string(j, "id");
    e.task = get_string(j, "task");
    e.prompt = get_string(j, "prompt");
    if (e.id.empty()) throw Error(ErrorKind::Validation, "field 'id' is empty");
    if (e.task.empty()) throw Error(ErrorKind::Validation, "field 'task' is empty");
    if (auto it = j.find("reference_answer"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw Error(ErrorKind::Validation, "field 'reference_answer' must be a string");
        e.reference_answer = it->get<std::string>();
    }
    if (auto it = j.find("external_difficulty"); it != j.end() && !it->is_null()) {
        e.external_difficulty = get_number(*it, "external_difficulty");
        if (!std::isfinite(*e.external_difficulty))
            throw Error(ErrorKind::Validation, "external_difficulty must be finite");
    }
    if (auto it = j.find("judge_score"); it != j.end() && !it->is_null()) {
        e.judge_score = get_number(*it, "judge_score");
        if (!(*e.judge_score >= 0.0 && *e.judge_score <= 1.0))
            throw Error(ErrorKind::Validation,
                        "judge_score out of range [0,1]: " + std::to_string(*e.judge_score));
    }
    e.token_length_prompt = count_tokens(e.prompt);
    return e;
}

std::vector<Example> read_corpus(const std::filesystem::path& path) {
    std::vector<Example> out;
    std::unordered_set<std::string> seen;
    for (auto& [number, text] : read_numbered_lines(path)) {
        const auto where = path.string() + ":" + std::to_string(number) + ": ";
        Example e;
        try {
            e = example_from_json(text);
        } catch (const Error& err) {
            throw Error(err.kind(), where + err.what());
        }
        if (!seen.insert(e.id).second)
            throw Error(ErrorKind::Validation, where + "duplicate id '" + e.id + "'");
        out.push_back(std::move(e));
    }
    return out;
}

void write_corpus(const std::vector<Example>& examples, const std::filesystem::path& path) {
    std::vector<std::string> lines;
    lines.reserve(examples.size());
    for (const auto& e : examples) lines.push_back(example_to_json(e));
    write_lines(lines, path);
}

// ---------------------------------------------------------------------------
// Trace

std::string trace_to_json(const Trace& t) {
    json j;
    j["example_id"] = t.example_id;
    j["teacher_id"] = t.teacher_id;
    j["raw_text"] = t.raw_text;
    json steps = json::array();
    for (const auto& s : t.steps) {
        json js;
        js["index"] = s.index;
        js["text"] = s.text;
        steps.push_back(std::move(js));
    }
    j["steps"] = std::move(steps);
    j["tok"] = t.tok;
    j["segmentation_mode"] = to_string(t.segmentation_mode);
    j["confidence"] = to_string(t.confidence);
    return j.dump();
}

Trace trace_from_json(std::string_view line) {
    const json j = parse_object(line);
    Trace t;
    t.example_id = get_string(j, "example_id");
    t.teacher_id = get_string(j, "teacher_id");
    t.raw_text = get_string(j, "raw_text");
    const json& steps = require(j, "steps");
    if (!steps.is_array()) throw Error(ErrorKind::Validation, "field 'steps' must be an array");
    for (const auto& js : steps) {
        if (!js.is_object()) throw Error(ErrorKind::Validation, "step must be an object");
        Step s;
        s.index = static_cast<int>(get_int(js, "index"));
        s.text = get_string(js, "text");
        t.steps.push_back(std::move(s));
    }
    t.tok = get_int(j, "tok");
    t.segmentation_mode = parse_segmentation_mode(get_string(j, "segmentation_mode"));
    t.confidence = parse_confidence(get_string(j, "confidence"));
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        if (t.steps[i].index != static_cast<int>(i + 1))
            throw Error(ErrorKind::Validation, "step indices must be 1..k contiguous");
    }
    return t;
}

std::vector<Trace> read_traces(const std::filesystem::path& path) {
    return read_records<Trace>(path, trace_from_json);
}

void write_traces(const std::vector<Trace>& traces, const std::filesystem::path& path) {
    std::vector<std::string> lines;
    lines.reserve(traces.size());
    for (const auto& t : traces) lines.push_back(trace_to_json(t));
    write_lines(lines, path);
}

// ---------------------------------------------------------------------------
// DoTScore

std::string score_to_json(const DoTScore& s) {
    json j;
    j["example_id"] = s.example_id;
    j["teacher_id"] = s.teacher_id;
    j["k"] = s.k;
    j["tok"] = s.tok;
    j["dot_norm"] = s.dot_norm;
    j["n_samples"] = s.n_samples;
    return j.dump();
}

DoTScore score_from_json(std::string_view line) {
    const json j = parse_object(line);
    DoTScore s;
    s.example_id = get_string(j, "example_id");
    s.teacher_id = get_string(j, "teacher_id");
    s.k = get_int(j, "k");
    s.tok = get_int(j, "tok");
    s.dot_norm = get_number(require(j, "dot_norm"), "dot_norm");
    if (auto it = j.find("n_samples"); it != j.end()) s.n_samples = get_int(j, "n_samples");
    return s;
}

std::vector<DoTScore> read_scores(const std::filesystem::path& path) {
    return read_records<DoTScore>(path, score_from_json);
}

void write_scores(const std::vector<DoTScore>& scores, const std::filesystem::path& path) {
    std::vector<std::string> lines;
    lines.reserve(scores.size());
    for (const auto& s : scores) lines.push_back(score_to_json(s));
    write_lines(lines, path);
}

}  // namespace dot
