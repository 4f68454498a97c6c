#include "dot/bucketer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace dot {

using json = nlohmann::ordered_json;

std::string to_string(const DepthRange& r) {
    if (!r.hi) return std::to_string(r.lo) + "+";
    return std::to_string(r.lo) + "-" + std::to_string(*r.hi);
}

void BucketSpec::validate() const {
    if (ranges.empty()) throw Error(ErrorKind::Parameter, "bucket spec has no ranges");
    if (ranges.front().lo != 1) throw Error(ErrorKind::Parameter, "first bucket must start at k=1");
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        const auto& r = ranges[i];
        const bool last = i + 1 == ranges.size();
        if (last && r.hi) throw Error(ErrorKind::Parameter, "last bucket must be open-ended");
        if (!last) {
            if (!r.hi) throw Error(ErrorKind::Parameter, "only the last bucket may be open-ended");
            if (*r.hi < r.lo) throw Error(ErrorKind::Parameter, "empty bucket range " + to_string(r));
            if (ranges[i + 1].lo != *r.hi + 1)
                throw Error(ErrorKind::Parameter, "bucket ranges must be contiguous at " + to_string(r));
        }
    }
    if (!(max_task_share > 0.0 && max_task_share <= 1.0))
        throw Error(ErrorKind::Parameter, "max_task_share must lie in (0, 1]");
}

std::vector<DepthRange> BucketSpec::parse_edges(std::string_view text) {
    auto parse_int = [&](std::string_view s) {
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
            throw Error(ErrorKind::Parameter, "bad bucket edge '" + std::string(s) + "' in '" + std::string(text) + "'");
        return v;
    };
    std::vector<DepthRange> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        auto item = text.substr(pos, comma - pos);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty() && item.back() == '+') {
            out.push_back({parse_int(item.substr(0, item.size() - 1)), std::nullopt});
        } else {
            const auto dash = item.find('-');
            if (dash == std::string_view::npos) {
                const auto v = parse_int(item);
                out.push_back({v, v});
            } else {
                out.push_back({parse_int(item.substr(0, dash)), parse_int(item.substr(dash + 1))});
            }
        }
        if (comma == text.size()) break;
        pos = comma + 1;
    }
    BucketSpec{out, 1.0}.validate();
    return out;
}

std::string BucketSpec::edges_string() const {
    std::string out;
    for (const auto& r : ranges) {
        if (!out.empty()) out += ",";
        out += to_string(r);
    }
    return out;
}

std::vector<std::string> Bucket::member_ids() const {
    std::vector<std::string> ids;
    ids.reserve(members.size());
    for (const auto& m : members) ids.push_back(m.id);
    return ids;
}

std::map<std::string, std::size_t> capped_task_counts(const std::map<std::string, std::size_t>& counts,
                                                      double max_task_share) {
    auto kept = counts;
    if (max_task_share >= 1.0) return kept;
    for (;;) {
        std::size_t total = 0;
        for (const auto& [task, c] : kept) total += c;
        const auto cap = static_cast<std::size_t>(std::ceil(max_task_share * static_cast<double>(total)));
        bool changed = false;
        for (auto& [task, c] : kept) {
            if (c > cap) {
                c = cap;
                changed = true;
            }
        }
        if (!changed) return kept;
    }
}

Bucketing bucketize(std::span<const DoTScore> scores,
                    const std::unordered_map<std::string, std::string>& task_of,
                    const BucketSpec& spec) {
    spec.validate();
    Bucketing out;
    for (std::size_t i = 0; i < spec.ranges.size(); ++i)
        out.buckets.push_back({static_cast<int>(i + 1), spec.ranges[i], {}, {}});

    std::unordered_set<std::string> seen;
    for (const auto& s : scores) {
        if (s.k < 1)
            throw Error(ErrorKind::InvalidScore, "example '" + s.example_id + "' has k=" + std::to_string(s.k));
        if (!seen.insert(s.example_id).second)
            throw Error(ErrorKind::InvalidScore,
                        "example '" + s.example_id + "' scored more than once; aggregate or pick one teacher");
        auto task = task_of.find(s.example_id);
        if (task == task_of.end())
            throw Error(ErrorKind::InvalidScore, "no task known for example '" + s.example_id + "'");
        auto b = std::find_if(out.buckets.begin(), out.buckets.end(),
                              [&](const Bucket& bk) { return bk.range.contains(s.k); });
        b->members.push_back({s.example_id, task->second, s.k});
    }

    for (auto& b : out.buckets) {
        std::map<std::string, std::vector<BucketMember>> by_task;
        for (auto& m : b.members) by_task[m.task].push_back(std::move(m));
        std::map<std::string, std::size_t> counts;
        for (const auto& [task, ms] : by_task) counts[task] = ms.size();
        const auto kept = capped_task_counts(counts, spec.max_task_share);

        b.members.clear();
        for (auto& [task, ms] : by_task) {
            std::sort(ms.begin(), ms.end(), [](const auto& a, const auto& c) { return a.id < c.id; });
            const auto keep = kept.at(task);
            for (std::size_t i = 0; i < ms.size(); ++i) {
                if (i < keep) b.members.push_back(std::move(ms[i]));
                else out.overflow.push_back({ms[i].id, ms[i].task, ms[i].k, b.index});
            }
            if (keep > 0) b.task_histogram[task] = keep;
        }
        std::sort(b.members.begin(), b.members.end(), [](const auto& a, const auto& c) {
            return std::tie(a.k, a.id) < std::tie(c.k, c.id);
        });
    }
    return out;
}

BucketReport describe(const Bucketing& bucketing) {
    BucketReport report;
    for (const auto& b : bucketing.buckets) {
        BucketStats row;
        row.index = b.index;
        row.range = b.range;
        row.size = b.members.size();
        row.task_histogram = b.task_histogram;
        if (!b.members.empty()) {
            std::int64_t lo = b.members.front().k;
            std::int64_t hi = lo;
            double sum = 0.0;
            for (const auto& m : b.members) {
                lo = std::min(lo, m.k);
                hi = std::max(hi, m.k);
                sum += static_cast<double>(m.k);
            }
            row.k_min = lo;
            row.k_max = hi;
            row.k_mean = sum / static_cast<double>(b.members.size());
        }
        for (const auto& o : bucketing.overflow) {
            if (o.bucket_index == b.index) ++row.overflow;
        }
        report.total_members += row.size;
        report.total_overflow += row.overflow;
        report.rows.push_back(std::move(row));
    }
    return report;
}

namespace {

std::string histogram_string(const std::map<std::string, std::size_t>& h) {
    if (h.empty()) return "\xE2\x80\x94";
    std::string out;
    for (const auto& [task, n] : h) {
        if (!out.empty()) out += ",";
        out += task + ":" + std::to_string(n);
    }
    return out;
}

}  // namespace

std::string BucketReport::to_text() const {
    static const std::string dash = "\xE2\x80\x94";
    std::ostringstream os;
    os << std::left << std::setw(7) << "bucket" << std::setw(8) << "range" << std::right << std::setw(6)
       << "size" << std::setw(7) << "k_min" << std::setw(8) << "k_mean" << std::setw(7) << "k_max"
       << std::setw(10) << "overflow" << "  tasks\n";
    for (const auto& r : rows) {
        std::ostringstream mean;
        if (r.k_mean) mean << std::fixed << std::setprecision(2) << *r.k_mean;
        // Right-align by display width; the em dash is one column but three bytes.
        auto cell = [](const std::string& s, int width) {
            const bool is_dash = s == "\xE2\x80\x94";
            const int w = is_dash ? 1 : static_cast<int>(s.size());
            return std::string(static_cast<std::size_t>(std::max(0, width - w)), ' ') + s;
        };
        os << std::left << std::setw(7) << r.index << std::setw(8) << to_string(r.range) << std::right
           << std::setw(6) << r.size
           << cell(r.k_min ? std::to_string(*r.k_min) : dash, 7)
           << cell(r.k_mean ? mean.str() : dash, 8)
           << cell(r.k_max ? std::to_string(*r.k_max) : dash, 7)
           << std::setw(10) << r.overflow << "  " << histogram_string(r.task_histogram) << "\n";
    }
    os << "total members " << total_members << ", overflow " << total_overflow << "\n";
    return os.str();
}

std::string BucketReport::to_json() const {
    json j;
    json rows_j = json::array();
    for (const auto& r : rows) {
        json row;
        row["index"] = r.index;
        row["range"] = to_string(r.range);
        row["size"] = r.size;
        row["k_min"] = r.k_min ? json(*r.k_min) : json(nullptr);
        row["k_mean"] = r.k_mean ? json(*r.k_mean) : json(nullptr);
        row["k_max"] = r.k_max ? json(*r.k_max) : json(nullptr);
        row["overflow"] = r.overflow;
        json hist = json::object();
        for (const auto& [task, n] : r.task_histogram) hist[task] = n;
        row["task_histogram"] = std::move(hist);
        rows_j.push_back(std::move(row));
    }
    j["buckets"] = std::move(rows_j);
    j["total_members"] = total_members;
    j["total_overflow"] = total_overflow;
    return j.dump();
}

std::string bucket_to_json(const Bucket& b) {
    json j;
    j["index"] = b.index;
    j["lo"] = b.range.lo;
    if (b.range.hi) j["hi"] = *b.range.hi;
    json members = json::array();
    for (const auto& m : b.members) {
        json jm;
        jm["id"] = m.id;
        jm["task"] = m.task;
        jm["k"] = m.k;
        members.push_back(std::move(jm));
    }
    j["members"] = std::move(members);
    json hist = json::object();
    for (const auto& [task, n] : b.task_histogram) hist[task] = n;
    j["task_histogram"] = std::move(hist);
    return j.dump();
}

Bucket bucket_from_json(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, std::string("malformed JSON: ") + e.what());
    }
    try {
        Bucket b;
        b.index = j.at("index").get<int>();
        b.range.lo = j.at("lo").get<std::int64_t>();
        if (j.contains("hi")) b.range.hi = j.at("hi").get<std::int64_t>();
        for (const auto& jm : j.at("members"))
            b.members.push_back({jm.at("id").get<std::string>(), jm.at("task").get<std::string>(),
                                 jm.at("k").get<std::int64_t>()});
        for (const auto& [task, n] : j.at("task_histogram").items()) b.task_histogram[task] = n.get<std::size_t>();
        return b;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Validation, std::string("bad bucket record: ") + e.what());
    }
}

std::string overflow_to_json(const OverflowEntry& e) {
    json j;
    j["id"] = e.id;
    j["task"] = e.task;
    j["k"] = e.k;
    j["bucket"] = e.bucket_index;
    return j.dump();
}

void write_buckets(const std::vector<Bucket>& buckets, const std::filesystem::path& path) {
    std::vector<std::string> lines;
    for (const auto& b : buckets) lines.push_back(bucket_to_json(b));
    write_lines(lines, path);
}

std::vector<Bucket> read_buckets(const std::filesystem::path& path) {
    std::vector<Bucket> out;
    std::size_t n = 0;
    for (const auto& line : read_lines(path)) {
        ++n;
        try {
            out.push_back(bucket_from_json(line));
        } catch (const Error& e) {
            throw Error(e.kind(), path.string() + ": record " + std::to_string(n) + ": " + e.what());
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].index != static_cast<int>(i + 1))
            throw Error(ErrorKind::Validation, path.string() + ": buckets must be listed shallow to deep, 1..n");
    }
    return out;
}

}  // namespace dot
