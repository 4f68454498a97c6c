#include "dot/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace dot {

using json = nlohmann::ordered_json;

namespace {

void check_pair(std::span<const double> xs, std::span<const double> ys, std::size_t min_n) {
    if (xs.size() != ys.size())
        throw Error(ErrorKind::Parameter, "length mismatch: " + std::to_string(xs.size()) + " vs " +
                                              std::to_string(ys.size()));
    if (xs.size() < min_n)
        throw Error(ErrorKind::Parameter, "need at least " + std::to_string(min_n) + " observations, got " +
                                              std::to_string(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
            throw Error(ErrorKind::Parameter, "non-finite observation at position " + std::to_string(i));
    }
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::int64_t tied_pairs_in_runs(const std::vector<std::size_t>& order, auto same) {
    std::int64_t total = 0;
    std::size_t run = 1;
    for (std::size_t i = 1; i <= order.size(); ++i) {
        if (i < order.size() && same(order[i - 1], order[i])) {
            ++run;
        } else {
            total += static_cast<std::int64_t>(run) * static_cast<std::int64_t>(run - 1) / 2;
            run = 1;
        }
    }
    return total;
}

// Stable merge sort of `idx` by ys, returning the number of exchanges
// (pairs with ys[left] > ys[right]).
std::int64_t merge_count(std::vector<std::size_t>& idx, std::vector<std::size_t>& buf,
                         std::span<const double> ys, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::int64_t swaps = merge_count(idx, buf, ys, lo, mid) + merge_count(idx, buf, ys, mid, hi);
    std::size_t i = lo;
    std::size_t j = mid;
    std::size_t k = lo;
    while (i < mid && j < hi) {
        if (ys[idx[j]] < ys[idx[i]]) {
            buf[k++] = idx[j++];
            swaps += static_cast<std::int64_t>(mid - i);
        } else {
            buf[k++] = idx[i++];
        }
    }
    while (i < mid) buf[k++] = idx[i++];
    while (j < hi) buf[k++] = idx[j++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              idx.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> xs) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(xs.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && xs[order[j]] == xs[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t m = i; m < j; ++m) ranks[order[m]] = avg;
        i = j;
    }
    return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
    check_pair(xs, ys, 3);
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    return pearson(rx, ry);
}

double tau_b(const TauCounts& c) {
    const auto dx = c.n0 - c.n1;
    const auto dy = c.n0 - c.n2;
    if (dx == 0 || dy == 0) return 0.0;
    return static_cast<double>(c.concordant_minus_discordant) /
           std::sqrt(static_cast<double>(dx) * static_cast<double>(dy));
}

double kendall_tau(std::span<const double> xs, std::span<const double> ys) {
    check_pair(xs, ys, 3);
    const std::size_t n = xs.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
        return xs[a] < xs[b] || (xs[a] == xs[b] && ys[a] < ys[b]);
    });

    TauCounts c;
    c.n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
    c.n1 = tied_pairs_in_runs(idx, [&](auto a, auto b) { return xs[a] == xs[b]; });
    c.n3 = tied_pairs_in_runs(idx, [&](auto a, auto b) { return xs[a] == xs[b] && ys[a] == ys[b]; });
    std::vector<std::size_t> buf(n);
    const auto swaps = merge_count(idx, buf, ys, 0, n);
    c.n2 = tied_pairs_in_runs(idx, [&](auto a, auto b) { return ys[a] == ys[b]; });
    c.concordant_minus_discordant = c.n0 - c.n1 - c.n2 + c.n3 - 2 * swaps;
    return tau_b(c);
}

AgreementReport cross_teacher_agreement(const std::map<std::string, std::vector<DoTScore>>& scores_by_teacher) {
    if (scores_by_teacher.size() < 2)
        throw Error(ErrorKind::Parameter, "agreement needs at least two teachers");

    std::map<std::string, std::unordered_map<std::string, const DoTScore*>> index;
    for (const auto& [teacher, scores] : scores_by_teacher) {
        auto& by_id = index[teacher];
        for (const auto& s : scores) {
            if (!by_id.emplace(s.example_id, &s).second)
                throw Error(ErrorKind::Parameter, "teacher '" + teacher + "' scores example '" + s.example_id +
                                                      "' more than once");
        }
    }

    std::vector<std::string> shared;
    for (const auto& [id, s] : index.begin()->second) {
        const bool everywhere = std::all_of(index.begin(), index.end(),
                                            [&](const auto& kv) { return kv.second.count(id) > 0; });
        if (everywhere) shared.push_back(id);
    }
    std::sort(shared.begin(), shared.end());
    if (shared.size() < 3)
        throw Error(ErrorKind::InsufficientOverlap,
                    "teachers share " + std::to_string(shared.size()) + " examples; need at least 3");

    AgreementReport report;
    report.shared_examples = shared.size();
    for (const auto& [teacher, _] : index) report.teachers.push_back(teacher);
    for (auto a = index.begin(); a != index.end(); ++a) {
        for (auto b = std::next(a); b != index.end(); ++b) {
            std::vector<double> ka, kb, ta, tb;
            for (const auto& id : shared) {
                const auto* sa = a->second.at(id);
                const auto* sb = b->second.at(id);
                ka.push_back(static_cast<double>(sa->k));
                kb.push_back(static_cast<double>(sb->k));
                ta.push_back(static_cast<double>(sa->tok));
                tb.push_back(static_cast<double>(sb->tok));
            }
            report.pairs.push_back({a->first, b->first, shared.size(), kendall_tau(ka, kb), kendall_tau(ta, tb)});
        }
    }
    return report;
}

std::string AgreementReport::to_text() const {
    std::ostringstream os;
    os << "shared examples: " << shared_examples << "\n";
    os << std::left << std::setw(16) << "teacher_a" << std::setw(16) << "teacher_b" << std::right
       << std::setw(10) << "tau_k" << std::setw(10) << "tau_tok" << "\n";
    os << std::fixed << std::setprecision(4);
    for (const auto& p : pairs) {
        os << std::left << std::setw(16) << p.teacher_a << std::setw(16) << p.teacher_b << std::right
           << std::setw(10) << p.tau_k << std::setw(10) << p.tau_tok << "\n";
    }
    return os.str();
}

std::string AgreementReport::to_json() const {
    json j;
    j["statistic"] = "kendall_tau_b";
    j["shared_examples"] = shared_examples;
    j["teachers"] = teachers;
    json ps = json::array();
    for (const auto& p : pairs) {
        json jp;
        jp["teacher_a"] = p.teacher_a;
        jp["teacher_b"] = p.teacher_b;
        jp["shared"] = p.shared;
        jp["tau_k"] = p.tau_k;
        jp["tau_tok"] = p.tau_tok;
        ps.push_back(std::move(jp));
    }
    j["pairs"] = std::move(ps);
    return j.dump();
}

ConfoundReport length_confound(std::span<const DoTScore> scores, std::span<const double> labels) {
    std::vector<double> ks;
    std::vector<double> toks;
    for (const auto& s : scores) {
        ks.push_back(static_cast<double>(s.k));
        toks.push_back(static_cast<double>(s.tok));
    }
    check_pair(ks, labels, 4);

    ConfoundReport r;
    r.n = ks.size();
    r.spearman_k = spearman(ks, labels);
    r.spearman_tok = spearman(toks, labels);

    const auto rk = average_ranks(ks);
    const auto rt = average_ranks(toks);
    const auto rl = average_ranks(labels);
    const double n = static_cast<double>(r.n);
    const double mt = std::accumulate(rt.begin(), rt.end(), 0.0) / n;
    double stt = 0.0;
    for (double t : rt) stt += (t - mt) * (t - mt);
    if (stt == 0.0) {
        r.note = "tok ranks are constant; partial correlation undefined";
        return r;
    }
    auto residuals = [&](const std::vector<double>& y, double& ss_total) {
        const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
        double sty = 0.0;
        ss_total = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            sty += (rt[i] - mt) * (y[i] - my);
            ss_total += (y[i] - my) * (y[i] - my);
        }
        const double slope = sty / stt;
        std::vector<double> res(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) res[i] = (y[i] - my) - slope * (rt[i] - mt);
        return res;
    };
    double ssk = 0.0;
    double ssl = 0.0;
    const auto res_k = residuals(rk, ssk);
    const auto res_l = residuals(rl, ssl);
    auto sum_sq = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return s;
    };
    const double rss_k = sum_sq(res_k);
    const double rss_l = sum_sq(res_l);
    constexpr double kRelEps = 1e-12;
    if (rss_k <= kRelEps * ssk || rss_l <= kRelEps * ssl) {
        r.partial_k = 0.0;
        r.note = "k or label fully explained by tok ranks; partial set to 0";
        return r;
    }
    r.partial_k = pearson(res_k, res_l);
    r.note = "partial = pearson(resid(rank k ~ rank tok), resid(rank label ~ rank tok))";
    return r;
}

std::string ConfoundReport::to_text() const {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    os << "n                       " << n << "\n";
    os << "spearman(k, label)      " << spearman_k << "\n";
    os << "spearman(tok, label)    " << spearman_tok << "\n";
    os << "partial(k, label | tok) ";
    if (partial_k) os << *partial_k;
    else os << "undefined";
    os << "\n" << note << "\n";
    return os.str();
}

std::string ConfoundReport::to_json() const {
    json j;
    j["n"] = n;
    j["spearman_k"] = spearman_k;
    j["spearman_tok"] = spearman_tok;
    j["partial_k"] = partial_k ? json(*partial_k) : json(nullptr);
    j["partial_defined"] = partial_k.has_value();
    j["note"] = note;
    return j.dump();
}

}  // namespace dot
