// Independent brute-force oracles used by the tests. These deliberately take
// the slow, obviously-correct path and never share code with the library
// implementations they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

namespace oracle {

// Two-sided Fisher p by full enumeration of the hypergeometric support with
// exact integer numerators (all margins must stay small enough that the
// binomial products fit a double exactly).
inline double fisher_enumeration(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
    const std::int64_t row1 = a + b, row2 = c + d, col1 = a + c;
    auto choose = [](std::int64_t n, std::int64_t k) -> double {
        if (k < 0 || k > n) return 0.0;
        double result = 1.0;
        for (std::int64_t i = 0; i < k; ++i)
            result = result * static_cast<double>(n - i) / static_cast<double>(i + 1);
        return std::round(result);
    };
    const std::int64_t k_low = std::max<std::int64_t>(0, col1 - row2);
    const std::int64_t k_high = std::min(row1, col1);
    std::vector<double> numerators;
    double total = 0.0;
    for (std::int64_t k = k_low; k <= k_high; ++k) {
        const double numerator = choose(row1, k) * choose(row2, col1 - k);
        numerators.push_back(numerator);
        total += numerator;
    }
    const double observed = numerators[static_cast<std::size_t>(a - k_low)];
    double tail = 0.0;
    for (const double numerator : numerators)
        if (numerator <= observed) tail += numerator;
    return tail / total;
}

// KS statistic by direct ECDF evaluation at every merged support point.
inline double ks_statistic_enumeration(std::span<const double> a, std::span<const double> b) {
    std::set<double> support(a.begin(), a.end());
    support.insert(b.begin(), b.end());
    double best = 0.0;
    for (const double x : support) {
        const auto below = [x](std::span<const double> s) {
            std::size_t count = 0;
            for (const double v : s)
                if (v <= x) ++count;
            return static_cast<double>(count) / static_cast<double>(s.size());
        };
        best = std::max(best, std::abs(below(a) - below(b)));
    }
    return best;
}

// Benjamini-Hochberg by scanning every candidate threshold directly: for each
// p in the vector, check whether retaining everything <= p keeps the
// empirical criterion rank*q/m satisfied, and take the widest such set.
inline std::vector<char> bh_threshold_scan(const std::vector<double>& p_values, double q) {
    const std::size_t m = p_values.size();
    std::vector<char> mask(m, 0);
    std::vector<double> sorted(p_values);
    std::sort(sorted.begin(), sorted.end());
    double best_threshold = -1.0;
    for (std::size_t k = 1; k <= m; ++k) {
        if (sorted[k - 1] <= static_cast<double>(k) * q / static_cast<double>(m))
            best_threshold = std::max(best_threshold, sorted[k - 1]);
    }
    if (best_threshold < 0.0) return mask;
    for (std::size_t i = 0; i < m; ++i) mask[i] = p_values[i] <= best_threshold ? 1 : 0;
    return mask;
}

// ROC-AUC by exhaustive pair counting, ties worth one half.
inline double roc_auc_pairs(std::span<const double> scores, std::span<const int> labels) {
    double wins = 0.0;
    std::int64_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

// Direct-summation difference features for a single (K, d).
inline double fixed_interval_direct(std::span<const double> c, int k, int d) {
    double sum = 0.0;
    for (int i = d - k; i <= d - 1; ++i) sum += c[static_cast<std::size_t>(i)];
    return c[static_cast<std::size_t>(d)] - sum / k;
}

inline double intra_year_seasonal_direct(std::span<const double> c, int d) {
    return c[static_cast<std::size_t>(d)] -
           (c[static_cast<std::size_t>(d - 13)] + c[static_cast<std::size_t>(d - 12)] +
            c[static_cast<std::size_t>(d - 11)]) /
               3.0;
}

}  // namespace oracle
