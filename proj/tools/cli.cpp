#include "cli.hpp"

#include <algorithm>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>
#include <json.hpp>

#include "dot/analyzer.hpp"
#include "dot/bucketer.hpp"
#include "dot/corpus.hpp"
#include "dot/harvester.hpp"
#include "dot/mock_endpoint.hpp"
#include "dot/scheduler.hpp"
#include "dot/scorer.hpp"
#include "dot/segmenter.hpp"

namespace dot::cli {

namespace {

namespace fs = std::filesystem;

struct SegmentFlags {
    int min_step_chars = 3;
    bool no_paragraph_fallback = false;
    std::string patterns = "step-label,number-dot,number-paren,number-enclosed,dash,asterisk,bullet";

    void add_to(CLI::App* app) {
        app->add_option("--min-step-chars", min_step_chars, "Fold steps with fewer visible chars (marker included)")
            ->capture_default_str();
        app->add_flag("--no-paragraph-fallback", no_paragraph_fallback,
                      "Fail instead of splitting on blank lines when no markers match");
        app->add_option("--patterns", patterns, "Marker styles in priority order")->capture_default_str();
    }

    SegmentationRules rules() const {
        SegmentationRules r;
        r.min_step_chars = min_step_chars;
        r.allow_paragraph_fallback = !no_paragraph_fallback;
        r.marker_patterns.clear();
        std::stringstream ss(patterns);
        for (std::string item; std::getline(ss, item, ',');) {
            if (!item.empty()) r.marker_patterns.push_back(parse_marker_style(item));
        }
        r.validate();
        return r;
    }
};

struct Context {
    std::string workdir = ".";
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;

    fs::path path(const std::string& p) const {
        if (p.empty()) return {};
        fs::path candidate(p);
        return candidate.is_absolute() ? candidate : fs::path(workdir) / candidate;
    }
};

// Effective option values of a subcommand, for provenance blocks.
std::map<std::string, std::string> effective_config(const CLI::App* app) {
    std::map<std::string, std::string> cfg;
    for (const auto* opt : app->get_options()) {
        const auto name = opt->get_single_name();
        if (name.empty() || name == "help") continue;
        std::string value;
        if (opt->count() > 0) {
            for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
        } else {
            value = opt->get_default_str();
        }
        cfg[name] = value;
    }
    return cfg;
}

std::vector<DoTScore> select_teacher(std::vector<DoTScore> scores, const std::string& teacher) {
    if (!teacher.empty()) {
        std::erase_if(scores, [&](const DoTScore& s) { return s.teacher_id != teacher; });
        if (scores.empty()) throw Error(ErrorKind::Validation, "no scores for teacher '" + teacher + "'");
        return scores;
    }
    for (const auto& s : scores) {
        if (s.teacher_id != scores.front().teacher_id)
            throw Error(ErrorKind::Validation, "scores hold several teachers; pass --teacher");
    }
    return scores;
}

void write_text(const Context& ctx, const std::string& file, const std::string& text) {
    if (file.empty()) {
        *ctx.out << text;
        return;
    }
    std::ofstream os(ctx.path(file), std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::Io, "cannot write " + ctx.path(file).string());
    os << text;
}

// --- harvest ---------------------------------------------------------------

struct HarvestArgs {
    std::string corpus, out, failures = "harvest_failures.jsonl", teacher_id, endpoint, model;
    std::string templates, cache_dir = ".dot_cache", api_key_env = "OPENAI_API_KEY";
    int samples = 1;
    double temperature = 0.7;
    double rate_limit = 2.0;
    int max_retries = 3;
    int concurrency = 4;
    int backoff_ms = 250;
    SegmentFlags seg;
};

int do_harvest(const Context& ctx, const HarvestArgs& a) {
    HarvestJob job;
    job.corpus_path = ctx.path(a.corpus);
    job.teacher = {a.teacher_id, a.endpoint, a.model, "", a.samples, a.temperature};
    if (!a.templates.empty()) job.templates = read_templates(ctx.path(a.templates));
    job.teacher.template_id = job.templates.front().template_id;
    job.cache_dir = ctx.path(a.cache_dir);
    job.rate_limit = a.rate_limit;
    job.max_retries = a.max_retries;
    job.concurrency = a.concurrency;
    job.api_key_env = a.api_key_env;
    job.backoff_base = std::chrono::milliseconds(a.backoff_ms);
    job.rules = a.seg.rules();

    const auto result = harvest(job);
    write_traces(result.traces, ctx.path(a.out));
    std::vector<std::string> lines;
    for (const auto& f : result.failures) lines.push_back(failure_to_json(f));
    write_lines(lines, ctx.path(a.failures));
    *ctx.err << "harvest: " << result.traces.size() << " traces, " << result.failures.size() << " failures, "
             << result.requests << " requests, " << result.cache_hits << " cache hits\n";
    return result.partial() ? kPartialFailure : kOk;
}

// --- segment ---------------------------------------------------------------

struct SegmentArgs {
    std::string in, out, errors = "segment_errors.jsonl", audit_out;
    double audit_fraction = 0.1;
    std::uint64_t seed = 0;
    SegmentFlags seg;
};

int do_segment(const Context& ctx, const SegmentArgs& a) {
    const auto rules = a.seg.rules();
    std::vector<Trace> traces;
    std::vector<std::string> errors;
    std::size_t n = 0;
    for (const auto& line : read_lines(ctx.path(a.in))) {
        ++n;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Parse, a.in + ": record " + std::to_string(n) + ": " + e.what());
        }
        const auto example_id = j.value("example_id", std::string());
        const auto teacher_id = j.value("teacher_id", std::string());
        if (example_id.empty() || teacher_id.empty() || !j.contains("raw_text"))
            throw Error(ErrorKind::Validation,
                        a.in + ": record " + std::to_string(n) + ": needs example_id, teacher_id and raw_text");
        try {
            traces.push_back(make_trace(example_id, teacher_id, j.at("raw_text").get<std::string>(), rules));
        } catch (const Error& e) {
            nlohmann::ordered_json ej;
            ej["example_id"] = example_id;
            ej["teacher_id"] = teacher_id;
            ej["record"] = n;
            ej["error"] = e.what();
            errors.push_back(ej.dump());
        }
    }
    write_traces(traces, ctx.path(a.out));
    write_lines(errors, ctx.path(a.errors));
    if (!a.audit_out.empty() && !traces.empty()) write_traces(audit_sample(traces, a.audit_fraction, a.seed), ctx.path(a.audit_out));
    std::size_t low = 0;
    for (const auto& t : traces) low += t.confidence == Confidence::Low;
    *ctx.err << "segment: " << traces.size() << " traces (" << low << " low confidence), " << errors.size()
             << " errors\n";
    return errors.empty() ? kOk : kPartialFailure;
}

// --- score -----------------------------------------------------------------

struct ScoreArgs {
    std::string traces, out, errors = "score_errors.jsonl";
};

int do_score(const Context& ctx, const ScoreArgs& a) {
    const auto traces = read_traces(ctx.path(a.traces));
    const auto scored = score_corpus(traces);
    write_scores(scored.scores, ctx.path(a.out));
    std::vector<std::string> lines;
    for (const auto& e : scored.errors) lines.push_back(score_error_to_json(e));
    write_lines(lines, ctx.path(a.errors));
    *ctx.err << "score: " << scored.scores.size() << " scores, " << scored.errors.size() << " errors\n";
    return scored.errors.empty() ? kOk : kPartialFailure;
}

// --- bucket ----------------------------------------------------------------

struct BucketArgs {
    std::string scores, corpus, teacher, edges = "1-3,4-6,7+", out, overflow = "overflow.jsonl", report, report_json;
    double max_task_share = 1.0;
};

int do_bucket(const Context& ctx, const BucketArgs& a) {
    BucketSpec spec;
    spec.ranges = BucketSpec::parse_edges(a.edges);
    spec.max_task_share = a.max_task_share;
    spec.validate();
    const auto scores = select_teacher(read_scores(ctx.path(a.scores)), a.teacher);
    std::unordered_map<std::string, std::string> task_of;
    for (const auto& e : read_corpus(ctx.path(a.corpus))) task_of[e.id] = e.task;
    const auto bucketing = bucketize(scores, task_of, spec);
    write_buckets(bucketing.buckets, ctx.path(a.out));
    std::vector<std::string> lines;
    for (const auto& o : bucketing.overflow) lines.push_back(overflow_to_json(o));
    write_lines(lines, ctx.path(a.overflow));
    const auto report = describe(bucketing);
    write_text(ctx, a.report, report.to_text());
    if (!a.report_json.empty()) write_text(ctx, a.report_json, report.to_json() + "\n");
    return kOk;
}

// --- schedule / baseline ---------------------------------------------------

struct ScheduleArgs {
    std::string buckets, corpus, out, summary, mode = "staged";
    double alpha = 1.0;
    int phases = 0;
    std::int64_t budget = 0;
    std::uint64_t seed = 0;
    bool with_replacement = false;
    bool adjacent_only = false;
};

int do_schedule(const Context& ctx, const ScheduleArgs& a, const CLI::App* sub) {
    const auto buckets = read_buckets(ctx.path(a.buckets));
    SchedulePlan plan;
    plan.mode = parse_schedule_mode(a.mode);
    plan.alpha = a.alpha;
    plan.phases = a.phases;
    plan.budget_per_phase = a.budget;
    plan.seed = a.seed;
    plan.with_replacement = a.with_replacement;
    plan.adjacent_only = a.adjacent_only;
    auto manifest = build_curriculum(buckets, plan);

    BucketSpec spec;
    spec.ranges.clear();
    for (const auto& b : buckets) spec.ranges.push_back(b.range);
    manifest.provenance.bucket_spec = spec.edges_string();
    manifest.provenance.scorer_version = kScorerVersion;
    if (!a.corpus.empty()) manifest.provenance.corpus_hash = sha256_file(ctx.path(a.corpus));
    manifest.provenance.config = effective_config(sub);
    write_manifest(manifest, ctx.path(a.out));
    write_text(ctx, a.summary, manifest_summary(manifest));
    return kOk;
}

struct BaselineArgs {
    std::string corpus, traces, out, summary, kind = "token_length";
    int phases = 1;
    std::int64_t budget = 0;
    std::uint64_t seed = 0;
};

int do_baseline(const Context& ctx, const BaselineArgs& a, const CLI::App* sub) {
    const auto examples = read_corpus(ctx.path(a.corpus));
    std::vector<Trace> traces;
    if (!a.traces.empty()) traces = read_traces(ctx.path(a.traces));
    SchedulePlan plan;
    plan.phases = a.phases;
    plan.budget_per_phase = a.budget;
    plan.seed = a.seed;
    auto manifest = baseline_order(examples, traces, parse_ordering(a.kind), plan);
    manifest.provenance.scorer_version = kScorerVersion;
    manifest.provenance.corpus_hash = sha256_file(ctx.path(a.corpus));
    manifest.provenance.config = effective_config(sub);
    write_manifest(manifest, ctx.path(a.out));
    write_text(ctx, a.summary, manifest_summary(manifest));
    return kOk;
}

// --- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
    std::string what = "label", scores, corpus, teacher, label = "external_difficulty", out;
    std::optional<double> min_spearman;
    std::optional<double> min_tau;
};

int do_analyze(const Context& ctx, const AnalyzeArgs& a) {
    const auto all = read_scores(ctx.path(a.scores));
    if (a.what == "teachers") {
        std::map<std::string, std::vector<DoTScore>> by_teacher;
        for (const auto& s : all) by_teacher[s.teacher_id].push_back(s);
        const auto report = cross_teacher_agreement(by_teacher);
        *ctx.out << report.to_text();
        if (!a.out.empty()) write_text(ctx, a.out, report.to_json() + "\n");
        if (a.min_tau) {
            for (const auto& p : report.pairs) {
                if (p.tau_k < *a.min_tau) {
                    *ctx.err << "analyze: tau_k " << p.tau_k << " for " << p.teacher_a << "/" << p.teacher_b
                             << " below threshold " << *a.min_tau << "\n";
                    return kValidationFailure;
                }
            }
        }
        return kOk;
    }
    if (a.what != "label" && a.what != "confound")
        throw Error(ErrorKind::Parameter, "--what must be label, confound or teachers");
    if (a.corpus.empty()) throw Error(ErrorKind::Parameter, "--corpus is required for label");
    const auto scores = select_teacher(all, a.teacher);
    std::unordered_map<std::string, Example> by_id;
    for (auto& e : read_corpus(ctx.path(a.corpus))) by_id.emplace(e.id, std::move(e));
    std::vector<DoTScore> aligned;
    std::vector<double> labels;
    for (const auto& s : scores) {
        auto it = by_id.find(s.example_id);
        if (it == by_id.end()) continue;
        const auto& label = a.label == "judge_score" ? it->second.judge_score : it->second.external_difficulty;
        if (!label) continue;
        aligned.push_back(s);
        labels.push_back(*label);
    }
    const auto report = length_confound(aligned, labels);
    *ctx.out << report.to_text();
    if (!a.out.empty()) write_text(ctx, a.out, report.to_json() + "\n");
    if (a.min_spearman && report.spearman_k < *a.min_spearman) {
        *ctx.err << "analyze: spearman(k, label) " << report.spearman_k << " below threshold " << *a.min_spearman
                 << "\n";
        return kValidationFailure;
    }
    return kOk;
}

// --- filter ----------------------------------------------------------------

struct FilterArgs {
    std::string scores, teacher, out;
    std::optional<std::int64_t> min_k;
    std::optional<std::int64_t> max_k;
};

int do_filter(const Context& ctx, const FilterArgs& a) {
    const auto scores = select_teacher(read_scores(ctx.path(a.scores)), a.teacher);
    std::string text;
    for (const auto& id : filter_by_depth(scores, a.min_k, a.max_k)) text += id + "\n";
    write_text(ctx, a.out, text);
    return kOk;
}

// --- mock-serve --------------------------------------------------------------

struct MockArgs {
    int port = 8089;
    double failure_rate = 0.0;
    int words_per_step = 6;
    int padding_jitter = 0;
    std::uint64_t seed = 1;
};

MockEndpoint* g_mock = nullptr;

int do_mock(const Context& ctx, const MockArgs& a) {
    MockEndpointOptions opts;
    opts.failure_rate = a.failure_rate;
    opts.words_per_step = a.words_per_step;
    opts.padding_jitter = a.padding_jitter;
    opts.seed = a.seed;
    MockEndpoint mock(opts, "127.0.0.1", a.port);
    *ctx.out << "mock endpoint listening at " << mock.url() << "\n" << std::flush;
    g_mock = &mock;
    std::signal(SIGINT, [](int) {
        if (g_mock) g_mock->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (g_mock) g_mock->stop();
    });
    mock.wait();
    g_mock = nullptr;
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Depth-of-thought curriculum toolkit: harvest, segment, score, bucket, schedule, analyze"};
    app.set_config("--config", "", "Config file (TOML/INI key = value; [subcommand] sections); flags override it");
    app.require_subcommand(1);
    Context ctx;
    ctx.out = &out;
    ctx.err = &err;
    app.add_option("--workdir", ctx.workdir, "Base directory for every relative path")->capture_default_str();

    HarvestArgs ha;
    auto* harvest_cmd = app.add_subcommand("harvest", "Collect teacher traces from an OpenAI-compatible endpoint");
    harvest_cmd->add_option("--corpus", ha.corpus, "Corpus JSONL")->required();
    harvest_cmd->add_option("--out", ha.out, "Trace JSONL output")->required();
    harvest_cmd->add_option("--failures", ha.failures, "Failure report JSONL")->capture_default_str();
    harvest_cmd->add_option("--teacher-id", ha.teacher_id, "Teacher id written into traces")->required();
    harvest_cmd->add_option("--endpoint", ha.endpoint, "Base URL; POSTs go to {endpoint}/chat/completions")->required();
    harvest_cmd->add_option("--model", ha.model, "Model name sent in requests")->required();
    harvest_cmd->add_option("--samples", ha.samples, "Self-consistency samples per example")->capture_default_str();
    harvest_cmd->add_option("--temperature", ha.temperature, "Sampling temperature")->capture_default_str();
    harvest_cmd->add_option("--templates", ha.templates, "Template JSONL (default: built-in numbered-v1)");
    harvest_cmd->add_option("--cache-dir", ha.cache_dir, "Response cache directory")->capture_default_str();
    harvest_cmd->add_option("--rate-limit", ha.rate_limit, "Max requests per second")->capture_default_str();
    harvest_cmd->add_option("--max-retries", ha.max_retries, "Retries on 429/5xx")->capture_default_str();
    harvest_cmd->add_option("--concurrency", ha.concurrency, "Requests in flight")->capture_default_str();
    harvest_cmd->add_option("--backoff-ms", ha.backoff_ms, "Base backoff, doubled per retry")->capture_default_str();
    harvest_cmd->add_option("--api-key-env", ha.api_key_env, "Environment variable holding the API key")
        ->capture_default_str();
    ha.seg.add_to(harvest_cmd);

    SegmentArgs sa;
    auto* segment_cmd = app.add_subcommand("segment", "Split raw traces into steps");
    segment_cmd->add_option("--in", sa.in, "JSONL with example_id, teacher_id, raw_text")->required();
    segment_cmd->add_option("--out", sa.out, "Trace JSONL output")->required();
    segment_cmd->add_option("--errors", sa.errors, "Segmentation error JSONL")->capture_default_str();
    segment_cmd->add_option("--audit-out", sa.audit_out, "Write a spot-check sample here");
    segment_cmd->add_option("--audit-fraction", sa.audit_fraction, "Fraction of traces to audit")->capture_default_str();
    segment_cmd->add_option("--seed", sa.seed, "Audit sampling seed")->capture_default_str();
    sa.seg.add_to(segment_cmd);

    ScoreArgs sc;
    auto* score_cmd = app.add_subcommand("score", "Compute DoT scores, median over samples");
    score_cmd->add_option("--traces", sc.traces, "Trace JSONL")->required();
    score_cmd->add_option("--out", sc.out, "Score JSONL output")->required();
    score_cmd->add_option("--errors", sc.errors, "Per-trace error JSONL")->capture_default_str();

    BucketArgs ba;
    auto* bucket_cmd = app.add_subcommand("bucket", "Partition scored examples into DoT buckets");
    bucket_cmd->add_option("--scores", ba.scores, "Score JSONL")->required();
    bucket_cmd->add_option("--corpus", ba.corpus, "Corpus JSONL (task tags)")->required();
    bucket_cmd->add_option("--teacher", ba.teacher, "Use this teacher's scores");
    bucket_cmd->add_option("--edges", ba.edges, "Bucket ranges")->capture_default_str();
    bucket_cmd->add_option("--max-task-share", ba.max_task_share, "Cap on one task's share per bucket")
        ->capture_default_str();
    bucket_cmd->add_option("--out", ba.out, "Bucket JSONL output")->required();
    bucket_cmd->add_option("--overflow", ba.overflow, "Overflow sidecar JSONL")->capture_default_str();
    bucket_cmd->add_option("--report", ba.report, "Text report file (default stdout)");
    bucket_cmd->add_option("--report-json", ba.report_json, "JSON report file");

    ScheduleArgs sh;
    auto* schedule_cmd = app.add_subcommand("schedule", "Build a shallow-to-deep curriculum manifest");
    schedule_cmd->add_option("--buckets", sh.buckets, "Bucket JSONL")->required();
    schedule_cmd->add_option("--corpus", sh.corpus, "Corpus JSONL, hashed into provenance");
    schedule_cmd->add_option("--mode", sh.mode, "staged or mixed")
        ->check(CLI::IsMember({"staged", "mixed"}))
        ->capture_default_str();
    schedule_cmd->add_option("--alpha", sh.alpha, "Mixing sharpness, w_i ~ i^alpha")->capture_default_str();
    schedule_cmd->add_option("--phases", sh.phases, "Phase count (0 = one per bucket)")->capture_default_str();
    schedule_cmd->add_option("--budget", sh.budget, "Examples per phase")->required();
    schedule_cmd->add_option("--seed", sh.seed, "Sampling seed")->capture_default_str();
    schedule_cmd->add_flag("--with-replacement", sh.with_replacement, "Draw with replacement inside a phase");
    schedule_cmd->add_flag("--adjacent-only", sh.adjacent_only, "Mixed: phase t draws from buckets t-1 and t only");
    schedule_cmd->add_option("--out", sh.out, "Manifest JSONL output")->required();
    schedule_cmd->add_option("--summary", sh.summary, "Per-phase summary file (default stdout)");

    BaselineArgs bl;
    auto* baseline_cmd = app.add_subcommand("baseline", "Build a baseline manifest with matched budgets");
    baseline_cmd->add_option("--corpus", bl.corpus, "Corpus JSONL")->required();
    baseline_cmd->add_option("--traces", bl.traces, "Trace JSONL (token_length)");
    baseline_cmd->add_option("--kind", bl.kind, "token_length, judge_score or random")
        ->check(CLI::IsMember({"token_length", "judge_score", "random"}))
        ->capture_default_str();
    baseline_cmd->add_option("--phases", bl.phases, "Phase count")->capture_default_str();
    baseline_cmd->add_option("--budget", bl.budget, "Examples per phase")->required();
    baseline_cmd->add_option("--seed", bl.seed, "Shuffle seed (random)")->capture_default_str();
    baseline_cmd->add_option("--out", bl.out, "Manifest JSONL output")->required();
    baseline_cmd->add_option("--summary", bl.summary, "Per-phase summary file (default stdout)");

    AnalyzeArgs an;
    auto* analyze_cmd = app.add_subcommand("analyze", "Rank-correlation checks of DoT");
    analyze_cmd->add_option("--what", an.what, "label (k vs label, with tok control), confound or teachers (cross-teacher)")
        ->check(CLI::IsMember({"label", "teachers", "confound"}))
        ->capture_default_str();
    analyze_cmd->add_option("--scores", an.scores, "Score JSONL")->required();
    analyze_cmd->add_option("--corpus", an.corpus, "Corpus JSONL with labels (label)");
    analyze_cmd->add_option("--teacher", an.teacher, "Teacher to analyse (label)");
    analyze_cmd->add_option("--label", an.label, "Label field")
        ->check(CLI::IsMember({"external_difficulty", "judge_score"}))
        ->capture_default_str();
    analyze_cmd->add_option("--out", an.out, "JSON report file");
    analyze_cmd->add_option("--min-spearman", an.min_spearman, "Exit 1 if spearman(k, label) is lower (label)");
    analyze_cmd->add_option("--min-tau", an.min_tau, "Exit 1 if any pairwise tau_k is lower (teachers)");

    FilterArgs fa;
    auto* filter_cmd = app.add_subcommand("filter", "List example ids within a depth range");
    filter_cmd->add_option("--scores", fa.scores, "Score JSONL")->required();
    filter_cmd->add_option("--teacher", fa.teacher, "Use this teacher's scores");
    filter_cmd->add_option("--min-k", fa.min_k, "Keep k >= min-k");
    filter_cmd->add_option("--max-k", fa.max_k, "Keep k <= max-k");
    filter_cmd->add_option("--out", fa.out, "Id list output (default stdout)");

    MockArgs ma;
    auto* mock_cmd = app.add_subcommand("mock-serve", "Run the offline mock chat endpoint");
    mock_cmd->add_option("--port", ma.port, "Listen port")->capture_default_str();
    mock_cmd->add_option("--failure-rate", ma.failure_rate, "Fraction of requests answered with 500")
        ->capture_default_str();
    mock_cmd->add_option("--words-per-step", ma.words_per_step, "Filler words per step")->capture_default_str();
    mock_cmd->add_option("--padding-jitter", ma.padding_jitter, "Up to this many extra words per step")
        ->capture_default_str();
    mock_cmd->add_option("--seed", ma.seed, "Failure injection seed")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (harvest_cmd->parsed()) return do_harvest(ctx, ha);
        if (segment_cmd->parsed()) return do_segment(ctx, sa);
        if (score_cmd->parsed()) return do_score(ctx, sc);
        if (bucket_cmd->parsed()) return do_bucket(ctx, ba);
        if (schedule_cmd->parsed()) return do_schedule(ctx, sh, schedule_cmd);
        if (baseline_cmd->parsed()) return do_baseline(ctx, bl, baseline_cmd);
        if (analyze_cmd->parsed()) return do_analyze(ctx, an);
        if (filter_cmd->parsed()) return do_filter(ctx, fa);
        if (mock_cmd->parsed()) return do_mock(ctx, ma);
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return kValidationFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kValidationFailure;
    }
    return kUsage;
}

}  // namespace dot::cli
