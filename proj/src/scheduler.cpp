#include "dot/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "dot/rng.hpp"

namespace dot {

using json = nlohmann::ordered_json;

const char* to_string(ScheduleMode mode) { return mode == ScheduleMode::Staged ? "staged" : "mixed"; }

const char* to_string(Ordering ordering) {
    switch (ordering) {
    case Ordering::Dot: return "dot";
    case Ordering::TokenLength: return "token_length";
    case Ordering::JudgeScore: return "judge_score";
    case Ordering::Random: return "random";
    }
    return "dot";
}

ScheduleMode parse_schedule_mode(std::string_view s) {
    if (s == "staged") return ScheduleMode::Staged;
    if (s == "mixed") return ScheduleMode::Mixed;
    throw Error(ErrorKind::Parameter, "unknown schedule mode '" + std::string(s) + "'");
}

Ordering parse_ordering(std::string_view s) {
    if (s == "dot") return Ordering::Dot;
    if (s == "token_length") return Ordering::TokenLength;
    if (s == "judge_score") return Ordering::JudgeScore;
    if (s == "random") return Ordering::Random;
    throw Error(ErrorKind::Parameter, "unknown ordering '" + std::string(s) + "'");
}

std::vector<double> phase_weights(int t, double alpha) {
    if (t < 1) throw Error(ErrorKind::Parameter, "phase index must be >= 1");
    if (!std::isfinite(alpha) || alpha < 0.0) throw Error(ErrorKind::Parameter, "alpha must be finite and >= 0");
    const auto n = static_cast<std::size_t>(t);
    if (alpha == 0.0) return std::vector<double>(n, 1.0 / static_cast<double>(t));

    // i^alpha directly while t^alpha is representable, otherwise (i/t)^alpha.
    const bool scaled = !(std::pow(static_cast<double>(t), alpha) < 1e300);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double base = static_cast<double>(i + 1);
        w[i] = scaled ? std::pow(base / static_cast<double>(t), alpha) : std::pow(base, alpha);
    }
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) x /= sum;
    return w;
}

std::vector<std::int64_t> largest_remainder(std::int64_t total, std::span<const double> weights) {
    if (weights.empty()) throw Error(ErrorKind::Parameter, "no weights");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorKind::Parameter, "weights must be finite and >= 0");
        sum += w;
    }
    if (!(sum > 0.0)) throw Error(ErrorKind::Parameter, "weights sum to zero");

    std::vector<std::int64_t> counts(weights.size());
    std::vector<double> rem(weights.size());
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double expected = static_cast<double>(total) * (weights[i] / sum);
        counts[i] = static_cast<std::int64_t>(std::floor(expected));
        rem[i] = weights[i] > 0.0 ? expected - static_cast<double>(counts[i]) : -1.0;
        assigned += counts[i];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rem[a] > rem[b]; });
    for (std::size_t j = 0; assigned < total; j = (j + 1) % order.size()) {
        if (rem[order[j]] < 0.0) continue;
        ++counts[order[j]];
        ++assigned;
    }
    // Rounding of `expected` can overshoot by one in pathological cases.
    for (std::size_t j = order.size(); assigned > total && j-- > 0;) {
        if (counts[order[j]] > 0) {
            --counts[order[j]];
            --assigned;
        }
    }
    return counts;
}

namespace {

int effective_phases(std::size_t n_buckets, const SchedulePlan& plan) {
    if (n_buckets == 0) throw Error(ErrorKind::Parameter, "no buckets to schedule");
    if (plan.budget_per_phase < 1) throw Error(ErrorKind::Parameter, "budget_per_phase must be >= 1");
    if (!std::isfinite(plan.alpha) || plan.alpha < 0.0)
        throw Error(ErrorKind::Parameter, "alpha must be finite and >= 0");
    const int t = plan.phases == 0 ? static_cast<int>(n_buckets) : plan.phases;
    if (t < 1) throw Error(ErrorKind::Parameter, "phase count must be >= 1");
    if (static_cast<std::size_t>(t) > n_buckets)
        throw Error(ErrorKind::Parameter, "phase count " + std::to_string(t) + " exceeds bucket count " +
                                              std::to_string(n_buckets));
    return t;
}

std::vector<double> plan_weights(int t, const SchedulePlan& plan) {
    std::vector<double> w(static_cast<std::size_t>(t), 0.0);
    if (plan.mode == ScheduleMode::Staged) {
        w.back() = 1.0;
        return w;
    }
    if (!plan.adjacent_only || t == 1) return phase_weights(t, plan.alpha);
    const double lo = std::pow(static_cast<double>(t - 1), plan.alpha);
    const double hi = std::pow(static_cast<double>(t), plan.alpha);
    w[static_cast<std::size_t>(t) - 2] = lo / (lo + hi);
    w[static_cast<std::size_t>(t) - 1] = hi / (lo + hi);
    return w;
}

}  // namespace

CurriculumManifest build_with_weights(std::span<const Bucket> buckets, const SchedulePlan& plan,
                                      const std::vector<std::vector<double>>& weights) {
    const int phases = effective_phases(buckets.size(), plan);
    if (weights.size() != static_cast<std::size_t>(phases))
        throw Error(ErrorKind::Parameter, "need one weight vector per phase");

    CurriculumManifest m;
    m.ordering = Ordering::Dot;
    m.plan = plan;
    m.plan.phases = phases;
    for (int t = 1; t <= phases; ++t) {
        const auto& w = weights[static_cast<std::size_t>(t - 1)];
        if (w.empty() || w.size() > static_cast<std::size_t>(t))
            throw Error(ErrorKind::Parameter, "phase " + std::to_string(t) + " may only weight buckets 1.." +
                                                  std::to_string(t));
        const auto counts = largest_remainder(plan.budget_per_phase, w);
        Phase phase;
        phase.index = t;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            if (w[i] <= 0.0) continue;
            const int bucket_index = static_cast<int>(i + 1);
            const auto& members = buckets[i].members;
            const auto c = static_cast<std::size_t>(counts[i]);
            phase.bucket_counts[bucket_index] = counts[i];
            if (c == 0) continue;
            if (members.empty() || (!plan.with_replacement && c > members.size()))
                throw Error(ErrorKind::Exhaustion,
                            "phase " + std::to_string(t) + " needs " + std::to_string(c) + " examples from bucket " +
                                std::to_string(bucket_index) + " which holds " + std::to_string(members.size()));
            auto rng = Rng::derive(plan.seed, {static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(bucket_index)});
            if (plan.with_replacement) {
                for (std::size_t j = 0; j < c; ++j) phase.ids.push_back(members[rng.below(members.size())].id);
            } else {
                for (auto idx : rng.sample_indices(members.size(), c)) phase.ids.push_back(members[idx].id);
            }
        }
        auto shuffle_rng = Rng::derive(plan.seed, {static_cast<std::uint64_t>(t), 0});
        shuffle_rng.shuffle(phase.ids);
        m.phases.push_back(std::move(phase));
    }
    return m;
}

CurriculumManifest build_curriculum(std::span<const Bucket> buckets, const SchedulePlan& plan) {
    const int phases = effective_phases(buckets.size(), plan);
    std::vector<std::vector<double>> weights;
    for (int t = 1; t <= phases; ++t) weights.push_back(plan_weights(t, plan));
    return build_with_weights(buckets, plan, weights);
}

CurriculumManifest baseline_order(std::span<const Example> examples, std::span<const Trace> traces,
                                  Ordering kind, const SchedulePlan& plan) {
    if (kind == Ordering::Dot) throw Error(ErrorKind::Parameter, "dot ordering is built by build_curriculum");
    if (plan.phases < 1) throw Error(ErrorKind::Parameter, "baseline needs an explicit phase count >= 1");
    if (plan.budget_per_phase < 1) throw Error(ErrorKind::Parameter, "budget_per_phase must be >= 1");

    struct Keyed {
        double signal;
        std::string id;
    };
    std::vector<Keyed> stream;
    std::vector<std::string> missing;

    if (kind == Ordering::TokenLength) {
        std::unordered_map<std::string, std::vector<std::int64_t>> toks;
        for (const auto& t : traces) toks[t.example_id].push_back(t.tok);
        for (const auto& e : examples) {
            auto it = toks.find(e.id);
            if (it == toks.end()) {
                missing.push_back(e.id);
                continue;
            }
            auto v = it->second;
            std::sort(v.begin(), v.end());
            stream.push_back({static_cast<double>(v[(v.size() - 1) / 2]), e.id});
        }
    } else if (kind == Ordering::JudgeScore) {
        for (const auto& e : examples) {
            if (!e.judge_score) missing.push_back(e.id);
            else stream.push_back({*e.judge_score, e.id});
        }
    } else {
        for (const auto& e : examples) stream.push_back({0.0, e.id});
    }
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size(); ++i) list += (i ? ", " : "") + missing[i];
        throw Error(ErrorKind::Precondition,
                    std::string("missing ") + to_string(kind) + " signal for: " + list);
    }

    std::sort(stream.begin(), stream.end(),
              [](const Keyed& a, const Keyed& b) { return std::tie(a.signal, a.id) < std::tie(b.signal, b.id); });
    if (kind == Ordering::Random) {
        Rng rng(plan.seed);
        rng.shuffle(stream);
    }

    const auto needed = static_cast<std::size_t>(plan.phases) * static_cast<std::size_t>(plan.budget_per_phase);
    if (needed > stream.size())
        throw Error(ErrorKind::Exhaustion, std::string(to_string(kind)) + " baseline needs " + std::to_string(needed) +
                                               " examples for " + std::to_string(plan.phases) + " phases but has " +
                                               std::to_string(stream.size()));

    CurriculumManifest m;
    m.ordering = kind;
    m.plan = plan;
    const auto budget = static_cast<std::size_t>(plan.budget_per_phase);
    for (int t = 1; t <= plan.phases; ++t) {
        Phase phase;
        phase.index = t;
        const auto begin = static_cast<std::size_t>(t - 1) * budget;
        for (std::size_t i = begin; i < begin + budget; ++i) phase.ids.push_back(stream[i].id);
        m.phases.push_back(std::move(phase));
    }
    return m;
}

std::vector<std::string> filter_by_depth(std::span<const DoTScore> scores, std::optional<std::int64_t> min_k,
                                         std::optional<std::int64_t> max_k) {
    if (!min_k && !max_k) throw Error(ErrorKind::Parameter, "filter needs min_k, max_k or both");
    if (min_k && max_k && *min_k > *max_k)
        throw Error(ErrorKind::Parameter, "min_k " + std::to_string(*min_k) + " > max_k " + std::to_string(*max_k));
    std::vector<const DoTScore*> hits;
    for (const auto& s : scores) {
        if ((!min_k || s.k >= *min_k) && (!max_k || s.k <= *max_k)) hits.push_back(&s);
    }
    std::sort(hits.begin(), hits.end(),
              [](const DoTScore* a, const DoTScore* b) { return std::tie(a->k, a->example_id) < std::tie(b->k, b->example_id); });
    std::vector<std::string> ids;
    for (const auto* s : hits) ids.push_back(s->example_id);
    return ids;
}

void CurriculumManifest::validate() const {
    if (phases.empty()) throw Error(ErrorKind::Validation, "manifest has no phases");
    if (plan.budget_per_phase < 1) throw Error(ErrorKind::Validation, "budget_per_phase must be >= 1");
    if (!std::isfinite(plan.alpha) || plan.alpha < 0.0) throw Error(ErrorKind::Validation, "alpha must be >= 0");
    for (std::size_t i = 0; i < phases.size(); ++i) {
        const auto& p = phases[i];
        if (p.index != static_cast<int>(i + 1))
            throw Error(ErrorKind::Validation, "phase indices must run 1..T");
        if (static_cast<std::int64_t>(p.ids.size()) > plan.budget_per_phase)
            throw Error(ErrorKind::Validation, "phase " + std::to_string(p.index) + " exceeds its budget");
        for (const auto& [bucket, n] : p.bucket_counts) {
            if (bucket < 1 || bucket > p.index)
                throw Error(ErrorKind::Validation, "phase " + std::to_string(p.index) + " draws from bucket " +
                                                       std::to_string(bucket));
        }
    }
}

std::vector<std::string> manifest_to_lines(const CurriculumManifest& m) {
    m.validate();
    std::vector<std::string> lines;
    json head;
    head["type"] = "manifest";
    head["ordering"] = to_string(m.ordering);
    json plan;
    plan["mode"] = to_string(m.plan.mode);
    plan["alpha"] = m.plan.alpha;
    plan["phases"] = m.plan.phases;
    plan["budget_per_phase"] = m.plan.budget_per_phase;
    plan["seed"] = m.plan.seed;
    plan["with_replacement"] = m.plan.with_replacement;
    plan["adjacent_only"] = m.plan.adjacent_only;
    head["plan"] = std::move(plan);
    json prov;
    prov["bucket_spec"] = m.provenance.bucket_spec;
    prov["scorer_version"] = m.provenance.scorer_version;
    prov["corpus_hash"] = m.provenance.corpus_hash;
    json config = json::object();
    for (const auto& [k, v] : m.provenance.config) config[k] = v;
    prov["config"] = std::move(config);
    head["provenance"] = std::move(prov);
    lines.push_back(head.dump());

    for (const auto& p : m.phases) {
        json jp;
        jp["type"] = "phase";
        jp["phase"] = p.index;
        json counts = json::object();
        for (const auto& [b, n] : p.bucket_counts) counts[std::to_string(b)] = n;
        jp["bucket_counts"] = std::move(counts);
        jp["ids"] = p.ids;
        lines.push_back(jp.dump());
    }
    return lines;
}

CurriculumManifest manifest_from_lines(const std::vector<std::string>& lines) {
    if (lines.empty()) throw Error(ErrorKind::Validation, "manifest file is empty");
    CurriculumManifest m;
    try {
        const auto head = json::parse(lines.front());
        if (head.at("type") != "manifest") throw Error(ErrorKind::Validation, "first line must be the manifest header");
        m.ordering = parse_ordering(head.at("ordering").get<std::string>());
        const auto& plan = head.at("plan");
        m.plan.mode = parse_schedule_mode(plan.at("mode").get<std::string>());
        m.plan.alpha = plan.at("alpha").get<double>();
        m.plan.phases = plan.at("phases").get<int>();
        m.plan.budget_per_phase = plan.at("budget_per_phase").get<std::int64_t>();
        m.plan.seed = plan.at("seed").get<std::uint64_t>();
        m.plan.with_replacement = plan.at("with_replacement").get<bool>();
        m.plan.adjacent_only = plan.at("adjacent_only").get<bool>();
        const auto& prov = head.at("provenance");
        m.provenance.bucket_spec = prov.at("bucket_spec").get<std::string>();
        m.provenance.scorer_version = prov.at("scorer_version").get<std::string>();
        m.provenance.corpus_hash = prov.at("corpus_hash").get<std::string>();
        for (const auto& [k, v] : prov.at("config").items()) m.provenance.config[k] = v.get<std::string>();

        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto jp = json::parse(lines[i]);
            if (jp.at("type") != "phase") throw Error(ErrorKind::Validation, "expected a phase record");
            Phase p;
            p.index = jp.at("phase").get<int>();
            for (const auto& [b, n] : jp.at("bucket_counts").items()) p.bucket_counts[std::stoi(b)] = n.get<std::int64_t>();
            p.ids = jp.at("ids").get<std::vector<std::string>>();
            m.phases.push_back(std::move(p));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("bad manifest: ") + e.what());
    }
    m.validate();
    return m;
}

void write_manifest(const CurriculumManifest& manifest, const std::filesystem::path& path) {
    write_lines(manifest_to_lines(manifest), path);
}

CurriculumManifest read_manifest(const std::filesystem::path& path) {
    return manifest_from_lines(read_lines(path));
}

std::string manifest_summary(const CurriculumManifest& m) {
    std::ostringstream os;
    os << "ordering=" << to_string(m.ordering) << " mode=" << to_string(m.plan.mode) << " alpha=" << m.plan.alpha
       << " phases=" << m.plan.phases << " budget=" << m.plan.budget_per_phase << " seed=" << m.plan.seed << "\n";
    for (const auto& p : m.phases) {
        os << "phase " << p.index << ": " << p.ids.size() << " examples";
        for (const auto& [b, n] : p.bucket_counts) os << "  b" << b << "=" << n;
        os << "\n";
    }
    return os.str();
}

}  // namespace dot
