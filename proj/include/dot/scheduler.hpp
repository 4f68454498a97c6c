#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dot/bucketer.hpp"
#include "dot/corpus.hpp"

namespace dot {

enum class ScheduleMode { Staged, Mixed };
enum class Ordering { Dot, TokenLength, JudgeScore, Random };

const char* to_string(ScheduleMode mode);
const char* to_string(Ordering ordering);
ScheduleMode parse_schedule_mode(std::string_view s);
Ordering parse_ordering(std::string_view s);

struct SchedulePlan {
    ScheduleMode mode = ScheduleMode::Staged;
    double alpha = 1.0;          // mixed only
    int phases = 0;              // 0 = one phase per bucket
    std::int64_t budget_per_phase = 1;
    std::uint64_t seed = 0;
    bool with_replacement = false;
    bool adjacent_only = false;  // mixed: phase t draws from buckets t-1 and t only

    bool operator==(const SchedulePlan&) const = default;
};

struct Phase {
    int index = 1;
    std::vector<std::string> ids;
    /// Realized draws per bucket index (1-based key). Empty for baselines.
    std::map<int, std::int64_t> bucket_counts;

    bool operator==(const Phase&) const = default;
};

struct Provenance {
    std::string bucket_spec;
    std::string scorer_version;
    std::string corpus_hash;
    /// Effective configuration echoed by the caller (flat key -> value).
    std::map<std::string, std::string> config;

    bool operator==(const Provenance&) const = default;
};

struct CurriculumManifest {
    Ordering ordering = Ordering::Dot;
    SchedulePlan plan;
    std::vector<Phase> phases;
    Provenance provenance;

    bool operator==(const CurriculumManifest&) const = default;
    /// Throws Validation on an empty phase list or a phase over budget.
    void validate() const;
};

/// Normalized w_i = i^alpha / sum_j j^alpha for i = 1..t. alpha = 0 gives
/// exactly 1/t.
std::vector<double> phase_weights(int t, double alpha);

/// Splits `total` into integer counts proportional to `weights` by
/// largest remainder; ties go to the lower index.
std::vector<std::int64_t> largest_remainder(std::int64_t total, std::span<const double> weights);

/// Staged: phase t draws budget examples from bucket t. Mixed: phase t
/// splits the budget over buckets 1..t by phase_weights(t, alpha).
/// Each (phase, bucket) draw uses its own seeded stream and the phase list
/// is then shuffled, so the result depends only on (buckets, plan).
CurriculumManifest build_curriculum(std::span<const Bucket> buckets, const SchedulePlan& plan);

/// Same as build_curriculum in mixed mode but with caller-supplied weight
/// vectors, weights[t-1] covering buckets 1..len. Used to check that staged
/// is the one-hot limit.
CurriculumManifest build_with_weights(std::span<const Bucket> buckets, const SchedulePlan& plan,
                                      const std::vector<std::vector<double>>& weights);

/// Single-stream baseline sorted ascending by the signal (ties by id) or
/// shuffled for Random, cut into plan.phases slices of budget_per_phase.
CurriculumManifest baseline_order(std::span<const Example> examples, std::span<const Trace> traces,
                                  Ordering kind, const SchedulePlan& plan);

/// Example ids with min_k <= k <= max_k, sorted by (k, id).
std::vector<std::string> filter_by_depth(std::span<const DoTScore> scores, std::optional<std::int64_t> min_k,
                                         std::optional<std::int64_t> max_k);

// Manifest JSONL: a header line {"type":"manifest",...} followed by one
// {"type":"phase",...} line per phase. Keys are emitted in declaration
// order so equal manifests serialise to equal bytes.
std::vector<std::string> manifest_to_lines(const CurriculumManifest& m);
CurriculumManifest manifest_from_lines(const std::vector<std::string>& lines);
void write_manifest(const CurriculumManifest& manifest, const std::filesystem::path& path);
CurriculumManifest read_manifest(const std::filesystem::path& path);

/// Per-phase counts per bucket, for audits.
std::string manifest_summary(const CurriculumManifest& m);

}  // namespace dot
