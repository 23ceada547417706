#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ntl/date.hpp"
#include "ntl/error.hpp"

namespace ntl {

// One raw meter-reading row. kwh values are non-negative after cleaning.
struct ConsumptionRecord {
    std::string customer_id;
    Date reading_date;
    double kwh_measured = 0.0;
    double kwh_billed = 0.0;
};

// One inspection row; ntl_found is the binary target.
struct InspectionRecord {
    std::string customer_id;
    Date inspection_date;
    int ntl_found = 0;
};

// A customer's consecutive monthly window ending at the reading matched to
// the latest inspection, plus the inspection outcome.
struct CustomerSeries {
    std::string customer_id;
    std::vector<double> consumptions;
    std::vector<Date> reading_dates;
    int label = 0;

    std::size_t length() const { return consumptions.size(); }

    bool operator==(const CustomerSeries&) const = default;
};

enum class FeatureFamily { GTS, AVG, DIF };

inline const char* family_tag(FeatureFamily f) {
    switch (f) {
        case FeatureFamily::GTS: return "gts";
        case FeatureFamily::AVG: return "avg";
        case FeatureFamily::DIF: return "dif";
    }
    return "?";
}

// Structured feature identity: family, calculator, ordered parameters.
// Canonical string form uses "__" between segments; single underscores are
// legal inside calculator names, so parsing is unambiguous. Parameter keys
// must not contain underscores.
struct FeatureName {
    FeatureFamily family = FeatureFamily::GTS;
    std::string calculator;
    std::vector<std::pair<std::string, std::string>> params;

    bool operator==(const FeatureName&) const = default;
};

inline std::string format_feature_name(const FeatureName& name) {
    std::string out = family_tag(name.family);
    out += "__";
    out += name.calculator;
    for (const auto& [key, value] : name.params) {
        out += "__";
        out += key;
        out += '_';
        out += value;
    }
    return out;
}

inline FeatureName parse_feature_name(std::string_view s) {
    std::vector<std::string_view> segments;
    std::size_t pos = 0;
    while (true) {
        const std::size_t sep = s.find("__", pos);
        if (sep == std::string_view::npos) {
            segments.push_back(s.substr(pos));
            break;
        }
        segments.push_back(s.substr(pos, sep - pos));
        pos = sep + 2;
    }
    if (segments.size() < 2) throw Error(ErrorCode::malformed_name, std::string(s));

    FeatureName name;
    if (segments[0] == "gts") name.family = FeatureFamily::GTS;
    else if (segments[0] == "avg") name.family = FeatureFamily::AVG;
    else if (segments[0] == "dif") name.family = FeatureFamily::DIF;
    else throw Error(ErrorCode::malformed_name, "unknown family in '" + std::string(s) + "'");

    if (segments[1].empty()) throw Error(ErrorCode::malformed_name, std::string(s));
    name.calculator = std::string(segments[1]);

    for (std::size_t i = 2; i < segments.size(); ++i) {
        const auto seg = segments[i];
        const std::size_t us = seg.find('_');
        if (us == std::string_view::npos || us == 0 || us + 1 >= seg.size())
            throw Error(ErrorCode::malformed_name, "bad parameter segment in '" + std::string(s) + "'");
        name.params.emplace_back(std::string(seg.substr(0, us)), std::string(seg.substr(us + 1)));
    }
    return name;
}

// Dense row-major matrix of doubles.
struct DataMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // rows * cols

    DataMatrix() = default;
    DataMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

    std::span<const double> row(std::size_t r) const {
        return {values.data() + r * cols, cols};
    }
    std::span<double> row(std::size_t r) {
        return {values.data() + r * cols, cols};
    }

    DataMatrix select_rows(std::span<const std::size_t> indices) const {
        DataMatrix out(indices.size(), cols);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            const auto src = row(indices[i]);
            std::copy(src.begin(), src.end(), out.row(i).begin());
        }
        return out;
    }

    DataMatrix select_cols(std::span<const std::size_t> indices) const {
        DataMatrix out(rows, indices.size());
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < indices.size(); ++j) out.at(r, j) = at(r, indices[j]);
        return out;
    }

    bool operator==(const DataMatrix&) const = default;
};

// Feature matrix with named, family-tagged columns; row order matches
// customer_ids.
struct FeatureMatrix {
    std::vector<std::string> customer_ids;
    std::vector<FeatureName> columns;
    DataMatrix data;

    std::size_t n_rows() const { return data.rows; }
    std::size_t n_cols() const { return data.cols; }

    bool operator==(const FeatureMatrix&) const = default;
};

struct TargetVector {
    std::vector<std::string> customer_ids;
    std::vector<int> labels;
};

enum class SeriesVerdict { ok, wrong_length, gap_in_months, non_monotone_dates };

inline const char* verdict_name(SeriesVerdict v) {
    switch (v) {
        case SeriesVerdict::ok: return "ok";
        case SeriesVerdict::wrong_length: return "WrongLength";
        case SeriesVerdict::gap_in_months: return "GapInMonths";
        case SeriesVerdict::non_monotone_dates: return "NonMonotoneDates";
    }
    return "?";
}

// Accepts iff the series has exactly expected_length readings on strictly
// increasing dates in consecutive calendar months. Consecutiveness is judged
// on (year, month) only; the day of month may vary. Never throws.
inline SeriesVerdict validate_customer_series(const CustomerSeries& s, std::size_t expected_length) {
    if (s.consumptions.size() != expected_length || s.reading_dates.size() != expected_length)
        return SeriesVerdict::wrong_length;
    for (std::size_t i = 1; i < s.reading_dates.size(); ++i) {
        if (!(s.reading_dates[i - 1] < s.reading_dates[i])) return SeriesVerdict::non_monotone_dates;
    }
    for (std::size_t i = 1; i < s.reading_dates.size(); ++i) {
        if (s.reading_dates[i].month_index() - s.reading_dates[i - 1].month_index() != 1)
            return SeriesVerdict::gap_in_months;
    }
    return SeriesVerdict::ok;
}

}  // namespace ntl
