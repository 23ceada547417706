#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ntl/core.hpp"
#include "ntl/csv.hpp"
#include "ntl/parallel.hpp"

namespace ntl {

enum class TestKind { fisher, ks };

inline const char* test_kind_name(TestKind k) { return k == TestKind::fisher ? "fisher" : "ks"; }

// Per-feature relevance record plus the FDR decision.
struct PValueTable {
    struct Entry {
        FeatureName feature;
        TestKind test = TestKind::ks;
        double p_value = 1.0;
    };
    std::vector<Entry> entries;
    double fdr_level = 0.05;
    std::vector<char> retained_mask;

    std::size_t retained_count() const {
        return static_cast<std::size_t>(std::count(retained_mask.begin(), retained_mask.end(), 1));
    }
};

// A feature is binary iff it takes exactly two distinct values. A constant
// column is not binary; it gets p = 1 downstream.
inline bool is_binary_feature(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::empty_sample, "empty feature column");
    const double first = values[0];
    double second = first;
    for (const double v : values) {
        if (v == first) continue;
        if (second == first) second = v;
        else if (v != second) return false;
    }
    return second != first;
}

// Two-sided Fisher exact test on the 2x2 table [[a, b], [c, d]]: the sum of
// hypergeometric probabilities of every table with the same margins whose
// probability does not exceed the observed one (with a 1+1e-7 slack against
// float ties). All arithmetic runs through log-factorials.
inline double fisher_exact_p(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
    if (a < 0 || b < 0 || c < 0 || d < 0)
        throw Error(ErrorCode::invalid_config, "negative contingency count");
    const std::int64_t row1 = a + b, row2 = c + d, col1 = a + c, col2 = b + d;
    if (row1 == 0 || row2 == 0 || col1 == 0 || col2 == 0)
        throw Error(ErrorCode::degenerate_margins, "zero margin in contingency table");
    const std::int64_t n = row1 + row2;

    const auto log_choose = [](std::int64_t nn, std::int64_t kk) {
        return std::lgamma(static_cast<double>(nn + 1)) -
               std::lgamma(static_cast<double>(kk + 1)) -
               std::lgamma(static_cast<double>(nn - kk + 1));
    };
    const double log_denominator = log_choose(n, col1);
    const auto log_prob = [&](std::int64_t k) {
        return log_choose(row1, k) + log_choose(row2, col1 - k) - log_denominator;
    };

    // Sum in probability space relative to the modal table and normalize, so
    // a tail that covers the whole support is exactly 1.
    const double log_observed = log_prob(a);
    const double cutoff = log_observed + std::log1p(1e-7);
    const std::int64_t k_low = std::max<std::int64_t>(0, col1 - row2);
    const std::int64_t k_high = std::min(row1, col1);
    double log_peak = log_observed;
    for (std::int64_t k = k_low; k <= k_high; ++k) log_peak = std::max(log_peak, log_prob(k));

    double tail = 0.0, total = 0.0;
    for (std::int64_t k = k_low; k <= k_high; ++k) {
        const double lp = log_prob(k);
        const double weight = std::exp(lp - log_peak);
        total += weight;
        if (lp <= cutoff) tail += weight;
    }
    return std::clamp(tail / total, 1e-300, 1.0);
}

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov. The statistic is the exact sup-distance of
// the two ECDFs over the merged support; the p-value uses the asymptotic
// Kolmogorov distribution with the usual small-sample correction
// lambda = (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) * D, ne = na*nb/(na+nb).
inline KsResult ks_two_sample(std::span<const double> sample_a, std::span<const double> sample_b) {
    if (sample_a.empty() || sample_b.empty())
        throw Error(ErrorCode::empty_sample, "KS sample is empty");
    std::vector<double> a(sample_a.begin(), sample_a.end());
    std::vector<double> b(sample_b.begin(), sample_b.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());

    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double statistic = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        statistic = std::max(statistic,
                             std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }

    KsResult result;
    result.statistic = statistic;
    if (statistic <= 0.0) return result;  // identical ECDFs

    const double ne = na * nb / (na + nb);
    const double sqrt_ne = std::sqrt(ne);
    const double lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * statistic;

    // Alternating Kolmogorov series 2*sum_j (-1)^(j-1) exp(-2 j^2 lambda^2);
    // when it fails to converge the distribution value is 1.
    const double exponent = -2.0 * lambda * lambda;
    double sum = 0.0, sign = 2.0, previous_term = 0.0;
    bool converged = false;
    for (int j = 1; j <= 100; ++j) {
        const double term = sign * std::exp(exponent * j * j);
        sum += term;
        if (std::abs(term) <= 1e-3 * previous_term || std::abs(term) <= 1e-8 * std::abs(sum)) {
            converged = true;
            break;
        }
        previous_term = std::abs(term);
        sign = -sign;
    }
    result.p_value = converged ? std::clamp(sum, 1e-300, 1.0) : 1.0;
    return result;
}

// One p-value per column: Fisher for binary features, KS for the rest,
// p = 1 for constants. Columns are independent, so the loop parallelizes.
inline PValueTable feature_p_values(const FeatureMatrix& matrix, const TargetVector& target,
                                    int workers = 1) {
    if (matrix.n_rows() != target.labels.size())
        throw Error(ErrorCode::schema_mismatch, "matrix rows and target length differ");
    const std::size_t n = target.labels.size();
    const std::int64_t positives =
        std::count(target.labels.begin(), target.labels.end(), 1);
    if (positives == 0 || positives == static_cast<std::int64_t>(n))
        throw Error(ErrorCode::single_class_target, "target has a single class");

    PValueTable table;
    table.entries.resize(matrix.n_cols());
    detail::run_partitioned(matrix.n_cols(), workers, [&](std::size_t c) {
        auto& entry = table.entries[c];
        entry.feature = matrix.columns[c];

        std::vector<double> column(n);
        for (std::size_t r = 0; r < n; ++r) column[r] = matrix.data.at(r, c);

        const double first = column[0];
        const bool constant =
            std::all_of(column.begin(), column.end(), [&](double v) { return v == first; });
        if (constant) {
            entry.test = TestKind::ks;
            entry.p_value = 1.0;
            return;
        }
        if (is_binary_feature(column)) {
            entry.test = TestKind::fisher;
            double low = column[0], high = column[0];
            for (const double v : column) {
                low = std::min(low, v);
                high = std::max(high, v);
            }
            std::int64_t a = 0, b = 0, cc = 0, dd = 0;
            for (std::size_t r = 0; r < n; ++r) {
                const bool is_high = column[r] == high;
                const bool is_pos = target.labels[r] == 1;
                if (!is_high && !is_pos) ++a;
                else if (!is_high && is_pos) ++b;
                else if (is_high && !is_pos) ++cc;
                else ++dd;
            }
            try {
                entry.p_value = fisher_exact_p(a, b, cc, dd);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::degenerate_margins) throw;
                entry.p_value = 1.0;
            }
        } else {
            entry.test = TestKind::ks;
            std::vector<double> class0, class1;
            for (std::size_t r = 0; r < n; ++r)
                (target.labels[r] == 1 ? class1 : class0).push_back(column[r]);
            entry.p_value = ks_two_sample(class0, class1).p_value;
        }
    });
    return table;
}

// Benjamini-Hochberg step-up: with ascending p(1) <= ... <= p(m), find the
// largest k with p(k) <= k*q/m and retain every feature whose p-value is at
// most p(k). Ties share fate by construction.
inline std::vector<char> benjamini_hochberg(const std::vector<double>& p_values, double q) {
    if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCode::invalid_config, "q must lie in (0,1)");
    const std::size_t m = p_values.size();
    std::vector<char> mask(m, 0);
    if (m == 0) return mask;

    std::vector<double> sorted(p_values);
    std::sort(sorted.begin(), sorted.end());
    double threshold = -1.0;
    for (std::size_t k = m; k >= 1; --k) {
        if (sorted[k - 1] <= static_cast<double>(k) * q / static_cast<double>(m)) {
            threshold = sorted[k - 1];
            break;
        }
    }
    if (threshold < 0.0) return mask;
    for (std::size_t i = 0; i < m; ++i) mask[i] = p_values[i] <= threshold ? 1 : 0;
    return mask;
}

struct SelectionResult {
    FeatureMatrix retained;
    PValueTable table;
};

// End-to-end relevance filter: p-values, then FDR control at level q. The
// retained matrix keeps the original column order.
inline SelectionResult select_features(const FeatureMatrix& matrix, const TargetVector& target,
                                       double q, int workers = 1) {
    SelectionResult result;
    result.table = feature_p_values(matrix, target, workers);
    result.table.fdr_level = q;
    std::vector<double> p_values;
    p_values.reserve(result.table.entries.size());
    for (const auto& entry : result.table.entries) p_values.push_back(entry.p_value);
    result.table.retained_mask = benjamini_hochberg(p_values, q);

    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < result.table.retained_mask.size(); ++c)
        if (result.table.retained_mask[c]) kept.push_back(c);

    result.retained.customer_ids = matrix.customer_ids;
    for (const std::size_t c : kept) result.retained.columns.push_back(matrix.columns[c]);
    result.retained.data = matrix.data.select_cols(kept);
    return result;
}

// Persisted as feature;test;p_value;retained.
inline void save_p_value_table(const PValueTable& table, const std::string& path) {
    csv::Writer writer(path);
    writer.row({"feature", "test", "p_value", "retained"});
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
        const auto& entry = table.entries[i];
        writer.row({format_feature_name(entry.feature), test_kind_name(entry.test),
                    csv::format_double(entry.p_value),
                    table.retained_mask[i] ? "1" : "0"});
    }
}

}  // namespace ntl
