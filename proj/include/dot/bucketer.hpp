#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dot/corpus.hpp"

namespace dot {

/// Inclusive integer range; hi == nullopt means open-ended.
struct DepthRange {
    std::int64_t lo = 1;
    std::optional<std::int64_t> hi;

    bool contains(std::int64_t k) const { return k >= lo && (!hi || k <= *hi); }
    bool operator==(const DepthRange&) const = default;
};

std::string to_string(const DepthRange& r);

struct BucketSpec {
    /// Contiguous cover of [1, inf); the last range is open-ended.
    std::vector<DepthRange> ranges = {{1, 3}, {4, 6}, {7, std::nullopt}};
    /// Cap on any single task's share of a bucket; 1.0 disables it.
    double max_task_share = 1.0;

    void validate() const;
    /// Parses "1-3,4-6,7+".
    static std::vector<DepthRange> parse_edges(std::string_view text);
    std::string edges_string() const;
};

struct BucketMember {
    std::string id;
    std::string task;
    std::int64_t k = 0;

    bool operator==(const BucketMember&) const = default;
};

struct Bucket {
    int index = 1;  // 1 = shallowest
    DepthRange range;
    std::vector<BucketMember> members;  // sorted by (k, id)
    std::map<std::string, std::size_t> task_histogram;

    std::vector<std::string> member_ids() const;
    bool operator==(const Bucket&) const = default;
};

struct OverflowEntry {
    std::string id;
    std::string task;
    std::int64_t k = 0;
    int bucket_index = 0;

    bool operator==(const OverflowEntry&) const = default;
};

struct Bucketing {
    std::vector<Bucket> buckets;
    std::vector<OverflowEntry> overflow;  // sorted by (bucket, task, id)
};

/// Assigns each scored example to the bucket whose range holds its k.
/// With max_task_share < 1 each bucket keeps the largest membership in which
/// no task exceeds ceil(share * retained); the lexicographically highest ids
/// of an over-represented task go to overflow first.
Bucketing bucketize(std::span<const DoTScore> scores,
                    const std::unordered_map<std::string, std::string>& task_of,
                    const BucketSpec& spec);

/// Largest per-task retained counts under the share cap (fixed point of
/// c_t = min(c_t, ceil(share * sum c))).
std::map<std::string, std::size_t> capped_task_counts(const std::map<std::string, std::size_t>& counts,
                                                      double max_task_share);

struct BucketStats {
    int index = 0;
    DepthRange range;
    std::size_t size = 0;
    std::optional<std::int64_t> k_min;
    std::optional<double> k_mean;
    std::optional<std::int64_t> k_max;
    std::map<std::string, std::size_t> task_histogram;
    std::size_t overflow = 0;
};

struct BucketReport {
    std::vector<BucketStats> rows;
    std::size_t total_members = 0;
    std::size_t total_overflow = 0;

    std::string to_text() const;
    std::string to_json() const;
};

BucketReport describe(const Bucketing& bucketing);

// JSONL codecs: one bucket per line; overflow sidecar one entry per line.
std::string bucket_to_json(const Bucket& b);
Bucket bucket_from_json(std::string_view line);
std::string overflow_to_json(const OverflowEntry& e);
void write_buckets(const std::vector<Bucket>& buckets, const std::filesystem::path& path);
std::vector<Bucket> read_buckets(const std::filesystem::path& path);

}  // namespace dot
