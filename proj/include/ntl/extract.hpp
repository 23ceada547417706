#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <mutex>
#include <numbers>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "ntl/core.hpp"
#include "ntl/csv.hpp"
#include "ntl/ingest.hpp"
#include "ntl/parallel.hpp"

namespace ntl {

struct ExtractionConfig {
    std::set<FeatureFamily> enabled_families{FeatureFamily::GTS, FeatureFamily::AVG,
                                             FeatureFamily::DIF};
    std::vector<int> autocorrelation_lags{1, 2, 3, 6, 12};
    std::vector<int> fft_indices{0, 1, 2, 3};
    std::vector<std::string> fft_parts{"real", "imag", "abs"};
    // Kept as strings so column names round-trip exactly.
    std::vector<std::string> symmetry_thresholds{"0.05", "0.25", "0.5"};

    void validate() const {
        if (enabled_families.empty())
            throw Error(ErrorCode::invalid_config, "no feature family enabled");
        if (enabled_families.contains(FeatureFamily::GTS) &&
            (autocorrelation_lags.empty() || fft_indices.empty() || fft_parts.empty() ||
             symmetry_thresholds.empty()))
            throw Error(ErrorCode::invalid_config, "empty GTS calculator parameter list");
    }
};

// Per-series calculator result. `imputed` flags values that were undefined
// and replaced by the imputation policy (always 0).
struct CalculatorOutput {
    std::vector<FeatureName> names;
    std::vector<double> values;
    std::vector<char> imputed;

    void push(FeatureName name, double value, bool was_imputed = false) {
        names.push_back(std::move(name));
        values.push_back(value);
        imputed.push_back(was_imputed ? 1 : 0);
    }

    void append(CalculatorOutput&& other) {
        names.insert(names.end(), std::make_move_iterator(other.names.begin()),
                     std::make_move_iterator(other.names.end()));
        values.insert(values.end(), other.values.begin(), other.values.end());
        imputed.insert(imputed.end(), other.imputed.begin(), other.imputed.end());
    }
};

namespace detail {

inline FeatureName dif_name(const char* calculator, std::initializer_list<std::pair<const char*, int>> params) {
    FeatureName name{FeatureFamily::DIF, calculator, {}};
    for (const auto& [k, v] : params) name.params.emplace_back(k, std::to_string(v));
    return name;
}

}  // namespace detail

// Difference of the current consumption against the mean of the K preceding
// months, for K in {3, 6, 12}. The month index d runs from 12 for every K so
// the calculator yields exactly 3*(N-12) features.
inline CalculatorOutput fixed_interval_features(const CustomerSeries& series) {
    const int n = static_cast<int>(series.length());
    if (n < 13)
        throw Error(ErrorCode::series_too_short,
                    "fixed_interval needs at least 13 months, got " + std::to_string(n));
    CalculatorOutput out;
    const auto& c = series.consumptions;
    for (const int k : {3, 6, 12}) {
        for (int d = 12; d < n; ++d) {
            double sum = 0.0;
            for (int i = d - k; i <= d - 1; ++i) sum += c[i];
            out.push(detail::dif_name("fixed_interval", {{"K", k}, {"d", d}}),
                     c[d] - sum / static_cast<double>(k));
        }
    }
    return out;
}

// Difference against the same month of the previous year; N-12 features.
inline CalculatorOutput intra_year_features(const CustomerSeries& series) {
    const int n = static_cast<int>(series.length());
    if (n < 13)
        throw Error(ErrorCode::series_too_short,
                    "intra_year needs at least 13 months, got " + std::to_string(n));
    CalculatorOutput out;
    const auto& c = series.consumptions;
    for (int d = 12; d < n; ++d)
        out.push(detail::dif_name("intra_year", {{"d", d}}), c[d] - c[d - 12]);
    return out;
}

// Difference against the mean of the three months centred on the same month
// of the previous year; N-13 features.
inline CalculatorOutput intra_year_seasonal_features(const CustomerSeries& series) {
    const int n = static_cast<int>(series.length());
    if (n < 14)
        throw Error(ErrorCode::series_too_short,
                    "intra_year_seasonal needs at least 14 months, got " + std::to_string(n));
    CalculatorOutput out;
    const auto& c = series.consumptions;
    for (int d = 13; d < n; ++d) {
        const double mean = (c[d - 13] + c[d - 12] + c[d - 11]) / 3.0;
        out.push(detail::dif_name("intra_year_seasonal", {{"d", d}}), c[d] - mean);
    }
    return out;
}

// Consumption divided by the exact number of days between consecutive meter
// readings; N-1 features. Exact day counts, never a 30-day business month.
inline CalculatorOutput daily_average_features(const CustomerSeries& series) {
    const int n = static_cast<int>(series.length());
    if (n < 2)
        throw Error(ErrorCode::series_too_short, "daily_avg needs at least 2 readings");
    CalculatorOutput out;
    for (int d = 1; d < n; ++d) {
        const std::int64_t days =
            series.reading_dates[d].serial_day() - series.reading_dates[d - 1].serial_day();
        if (days <= 0)
            throw Error(ErrorCode::zero_day_gap,
                        "readings " + std::to_string(d - 1) + " and " + std::to_string(d) +
                            " of customer " + series.customer_id + " are not ascending");
        FeatureName name{FeatureFamily::AVG, "daily_avg", {{"d", std::to_string(d)}}};
        out.push(std::move(name), series.consumptions[d] / static_cast<double>(days));
    }
    return out;
}

namespace detail {

// Direct DFT coefficient X_j = sum_t x_t * exp(-2*pi*i*j*t/N). Series here
// are a few dozen points, so the quadratic evaluation is exact enough and
// needs no FFT machinery.
inline std::complex<double> dft_coefficient(const std::vector<double>& x, int j) {
    const double n = static_cast<double>(x.size());
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) *
                             static_cast<double>(t) / n;
        acc += x[t] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    return acc;
}

struct SeriesMoments {
    double mean = 0, m2 = 0, m3 = 0, m4 = 0;  // central moments, population
    double minimum = 0, maximum = 0, median = 0, sum = 0;
};

inline SeriesMoments series_moments(const std::vector<double>& x) {
    SeriesMoments m;
    const double n = static_cast<double>(x.size());
    m.sum = std::accumulate(x.begin(), x.end(), 0.0);
    m.mean = m.sum / n;
    m.minimum = *std::min_element(x.begin(), x.end());
    m.maximum = *std::max_element(x.begin(), x.end());
    for (const double v : x) {
        const double d = v - m.mean;
        m.m2 += d * d;
        m.m3 += d * d * d;
        m.m4 += d * d * d * d;
    }
    m.m2 /= n;
    m.m3 /= n;
    m.m4 /= n;
    std::vector<double> sorted(x);
    std::sort(sorted.begin(), sorted.end());
    const std::size_t half = sorted.size() / 2;
    m.median = sorted.size() % 2 == 1 ? sorted[half] : 0.5 * (sorted[half - 1] + sorted[half]);
    return m;
}

}  // namespace detail

// Generic time-series statistics: summary statistics, distribution
// characteristics and observed dynamics. Undefined values (zero variance,
// flat range, lag beyond the series) follow the imputation policy: emit 0
// and flag the cell.
inline CalculatorOutput gts_features(const CustomerSeries& series, const ExtractionConfig& config) {
    const int n = static_cast<int>(series.length());
    if (n < 3)
        throw Error(ErrorCode::series_too_short,
                    "gts needs at least 3 months, got " + std::to_string(n));
    const auto& x = series.consumptions;
    const auto m = detail::series_moments(x);
    const double variance = m.m2;
    const double stddev = std::sqrt(variance);

    CalculatorOutput out;
    auto plain = [&](const char* calculator, double value, bool imputed = false) {
        out.push(FeatureName{FeatureFamily::GTS, calculator, {}}, value, imputed);
    };

    plain("maximum", m.maximum);
    plain("minimum", m.minimum);
    plain("mean", m.mean);
    plain("median", m.median);
    plain("variance", variance);
    plain("standard_deviation", stddev);
    if (variance > 0.0) {
        plain("skewness", m.m3 / std::pow(m.m2, 1.5));
        plain("kurtosis", m.m4 / (m.m2 * m.m2) - 3.0);
    } else {
        plain("skewness", 0.0, true);
        plain("kurtosis", 0.0, true);
    }
    plain("sum", m.sum);
    plain("abs_energy", std::inner_product(x.begin(), x.end(), x.begin(), 0.0));

    int above = 0, below = 0;
    for (const double v : x) {
        if (v > m.median) ++above;
        if (v < m.median) ++below;
    }
    plain("count_above_median", static_cast<double>(above));
    plain("count_below_median", static_cast<double>(below));

    // Mean of the centred second-order differences.
    double second = 0.0;
    for (int i = 0; i + 2 < n; ++i) second += x[i + 2] - 2.0 * x[i + 1] + x[i];
    plain("mean_second_derivative_central", second / (2.0 * static_cast<double>(n - 2)));

    for (const auto& r : config.symmetry_thresholds) {
        FeatureName name{FeatureFamily::GTS, "symmetry_looking", {{"r", r}}};
        const double range = m.maximum - m.minimum;
        if (range > 0.0) {
            const double threshold = *csv::parse_double(r) * range;
            out.push(std::move(name), std::abs(m.mean - m.median) < threshold ? 1.0 : 0.0);
        } else {
            out.push(std::move(name), 0.0, true);
        }
    }

    for (const int lag : config.autocorrelation_lags) {
        FeatureName name{FeatureFamily::GTS, "autocorrelation", {{"lag", std::to_string(lag)}}};
        if (lag >= n || variance <= 0.0) {
            out.push(std::move(name), 0.0, true);
            continue;
        }
        double acc = 0.0;
        for (int i = 0; i + lag < n; ++i) acc += (x[i] - m.mean) * (x[i + lag] - m.mean);
        out.push(std::move(name), acc / (static_cast<double>(n - lag) * variance));
    }

    for (const int j : config.fft_indices) {
        const std::complex<double> coeff = detail::dft_coefficient(x, j);
        for (const auto& part : config.fft_parts) {
            FeatureName name{FeatureFamily::GTS,
                             "fft_coefficient",
                             {{"j", std::to_string(j)}, {"part", part}}};
            double value = 0.0;
            if (part == "real") value = coeff.real();
            else if (part == "imag") value = coeff.imag();
            else value = std::abs(coeff);
            out.push(std::move(name), value);
        }
    }
    return out;
}

inline CalculatorOutput extract_series_features(const CustomerSeries& series,
                                                const ExtractionConfig& config) {
    CalculatorOutput out;
    if (config.enabled_families.contains(FeatureFamily::GTS))
        out.append(gts_features(series, config));
    if (config.enabled_families.contains(FeatureFamily::AVG))
        out.append(daily_average_features(series));
    if (config.enabled_families.contains(FeatureFamily::DIF)) {
        out.append(fixed_interval_features(series));
        out.append(intra_year_features(series));
        out.append(intra_year_seasonal_features(series));
    }
    return out;
}

struct ExtractionResult {
    FeatureMatrix matrix;
    std::vector<std::int64_t> imputed_per_column;

    std::int64_t total_imputed() const {
        return std::accumulate(imputed_per_column.begin(), imputed_per_column.end(),
                               std::int64_t{0});
    }
};

// Extracts the configured families for every series. The column schema is
// fixed by (config, N) and identical for every row; rows keep the dataset's
// customer order. Worker fan-out writes disjoint rows, so the result is
// bit-identical for any worker count.
inline ExtractionResult extract_all(const SeriesDataset& dataset, const ExtractionConfig& config,
                                    int workers = 1) {
    config.validate();
    if (dataset.series.empty()) throw Error(ErrorCode::empty_result, "empty dataset");

    ExtractionResult result;
    auto first = extract_series_features(dataset.series.front(), config);
    const std::size_t n_cols = first.names.size();
    result.matrix.columns = std::move(first.names);
    result.matrix.customer_ids.reserve(dataset.size());
    for (const auto& series : dataset.series) result.matrix.customer_ids.push_back(series.customer_id);
    result.matrix.data = DataMatrix(dataset.size(), n_cols);
    result.imputed_per_column.assign(n_cols, 0);

    std::vector<std::vector<char>> imputed_rows(dataset.size());
    std::copy(first.values.begin(), first.values.end(), result.matrix.data.row(0).begin());
    imputed_rows[0] = std::move(first.imputed);

    std::exception_ptr failure;
    std::mutex failure_mutex;
    detail::run_partitioned(dataset.size() - 1, workers, [&](std::size_t job) {
        const std::size_t r = job + 1;
        try {
            auto out = extract_series_features(dataset.series[r], config);
            if (out.values.size() != n_cols || out.names != result.matrix.columns)
                throw Error(ErrorCode::schema_mismatch,
                            "column schema drifted at customer " + dataset.series[r].customer_id);
            std::copy(out.values.begin(), out.values.end(), result.matrix.data.row(r).begin());
            imputed_rows[r] = std::move(out.imputed);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    });
    if (failure) std::rethrow_exception(failure);

    for (const auto& flags : imputed_rows)
        for (std::size_t c = 0; c < flags.size(); ++c)
            if (flags[c]) ++result.imputed_per_column[c];
    return result;
}

// Feature matrix CSV: customer_id;<canonical feature names...>, values in
// shortest round-trip decimal form.
inline void save_feature_matrix(const FeatureMatrix& matrix, const std::string& path) {
    csv::Writer writer(path);
    std::vector<std::string> header{"customer_id"};
    for (const auto& column : matrix.columns) header.push_back(format_feature_name(column));
    writer.row(header);
    for (std::size_t r = 0; r < matrix.n_rows(); ++r) {
        std::vector<std::string> row{matrix.customer_ids[r]};
        for (std::size_t c = 0; c < matrix.n_cols(); ++c)
            row.push_back(csv::format_double(matrix.data.at(r, c)));
        writer.row(row);
    }
}

inline FeatureMatrix load_feature_matrix(const std::string& path) {
    const auto table = csv::read_file(path);
    if (table.header.empty() || table.header[0] != "customer_id")
        throw Error(ErrorCode::schema_mismatch, "unexpected feature matrix header in " + path);
    FeatureMatrix matrix;
    for (std::size_t c = 1; c < table.header.size(); ++c)
        matrix.columns.push_back(parse_feature_name(table.header[c]));
    matrix.data = DataMatrix(table.rows.size(), matrix.columns.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != table.header.size())
            throw Error(ErrorCode::schema_mismatch, "wrong column count in " + path);
        matrix.customer_ids.push_back(row[0]);
        for (std::size_t c = 1; c < row.size(); ++c) {
            const auto value = csv::parse_double(row[c]);
            if (!value) throw Error(ErrorCode::schema_mismatch, "bad value in " + path);
            matrix.data.at(r, c - 1) = *value;
        }
    }
    return matrix;
}

}  // namespace ntl
