#pragma once

// Slow, independent reference computations used only by tests.

#include <mpfr.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace oracle {

/// k / ln(1 + tok) evaluated with 256-bit MPFR, rounded to double.
inline double dot_norm(std::int64_t k, std::int64_t tok) {
    mpfr_t x, num, out;
    mpfr_inits2(256, x, num, out, static_cast<mpfr_ptr>(nullptr));
    mpfr_set_si(x, static_cast<long>(tok), MPFR_RNDN);
    mpfr_log1p(x, x, MPFR_RNDN);
    mpfr_set_si(num, static_cast<long>(k), MPFR_RNDN);
    mpfr_div(out, num, x, MPFR_RNDN);
    const double d = mpfr_get_d(out, MPFR_RNDN);
    mpfr_clears(x, num, out, static_cast<mpfr_ptr>(nullptr));
    return d;
}

/// i^alpha / sum_j j^alpha for integer alpha, as an exact rational rounded
/// to double.
inline std::vector<double> exact_weights(int t, unsigned alpha) {
    using boost::multiprecision::cpp_int;
    using boost::multiprecision::cpp_rational;
    cpp_int total = 0;
    std::vector<cpp_int> raw;
    for (int i = 1; i <= t; ++i) {
        raw.push_back(boost::multiprecision::pow(cpp_int(i), alpha));
        total += raw.back();
    }
    std::vector<double> w;
    for (const auto& r : raw) w.push_back(static_cast<double>(cpp_rational(r, total)));
    return w;
}

/// Ranks by counting: 1 + #less + #equal-others / 2.
inline std::vector<double> count_ranks(const std::vector<double>& xs) {
    std::vector<double> r(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double less = 0, eq = 0;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            if (xs[j] < xs[i]) ++less;
            else if (j != i && xs[j] == xs[i]) ++eq;
        }
        r[i] = 1.0 + less + eq / 2.0;
    }
    return r;
}

/// Spearman as the Pearson correlation of counted ranks, in long double.
inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    const auto rx = count_ranks(xs);
    const auto ry = count_ranks(ys);
    const long double n = static_cast<long double>(xs.size());
    long double mx = 0, my = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0 || syy == 0) return 0.0;
    return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

/// Kendall tau-b by visiting every pair.
inline double kendall_tau_b(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::int64_t conc = 0, disc = 0, tx = 0, ty = 0, n0 = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            ++n0;
            const double dx = xs[i] - xs[j];
            const double dy = ys[i] - ys[j];
            if (dx == 0) ++tx;
            if (dy == 0) ++ty;
            if (dx == 0 || dy == 0) continue;
            ((dx > 0) == (dy > 0) ? conc : disc) += 1;
        }
    }
    const auto a = n0 - tx;
    const auto b = n0 - ty;
    if (a == 0 || b == 0) return 0.0;
    return static_cast<double>(conc - disc) / std::sqrt(static_cast<double>(a) * static_cast<double>(b));
}

}  // namespace oracle
