#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dot/corpus.hpp"

namespace dot {

/// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> xs);

/// Spearman rho: Pearson correlation of average ranks. A constant input
/// has no rank variance and yields 0. Needs equal lengths >= 3.
double spearman(std::span<const double> xs, std::span<const double> ys);

/// Kendall tau-b in O(n log n) (Knight's merge-sort count). All-ties on
/// either side yields 0.
double kendall_tau(std::span<const double> xs, std::span<const double> ys);

/// Integer pair counts behind tau-b. n1/n2 are tied pairs within xs/ys.
struct TauCounts {
    std::int64_t n0 = 0;  // n(n-1)/2
    std::int64_t n1 = 0;
    std::int64_t n2 = 0;
    std::int64_t n3 = 0;  // tied in both
    std::int64_t concordant_minus_discordant = 0;
};
/// tau-b from counts; shared by the fast path and test oracles.
double tau_b(const TauCounts& c);

struct PairAgreement {
    std::string teacher_a;  // teacher_a < teacher_b
    std::string teacher_b;
    std::size_t shared = 0;
    double tau_k = 0.0;
    double tau_tok = 0.0;

    bool operator==(const PairAgreement&) const = default;
};

struct AgreementReport {
    std::size_t shared_examples = 0;  // intersection over all teachers
    std::vector<std::string> teachers;
    std::vector<PairAgreement> pairs;  // lexicographic (a, b)

    bool operator==(const AgreementReport&) const = default;
    std::string to_text() const;
    std::string to_json() const;
};

/// Pairwise tau-b of k and of tok over the examples every teacher scored.
AgreementReport cross_teacher_agreement(const std::map<std::string, std::vector<DoTScore>>& scores_by_teacher);

struct ConfoundReport {
    std::size_t n = 0;
    double spearman_k = 0.0;
    double spearman_tok = 0.0;
    /// Partial Spearman of k with the label controlling for tok; empty when
    /// the tok ranks are constant.
    std::optional<double> partial_k;
    std::string note;

    std::string to_text() const;
    std::string to_json() const;
};

/// Raw and tok-controlled rank association of k with an external label.
/// The partial is Pearson(res(rank k ~ rank tok), res(rank label ~ rank tok))
/// with least-squares residuals; if either residual vector is zero it is 0.
ConfoundReport length_confound(std::span<const DoTScore> scores, std::span<const double> labels);

}  // namespace dot
