#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ntl/core.hpp"
#include "ntl/csv.hpp"
#include "ntl/parallel.hpp"

namespace ntl {

enum class ConsumptionColumn { measured, billed };

inline const char* column_name(ConsumptionColumn c) {
    return c == ConsumptionColumn::measured ? "measured" : "billed";
}

struct PreprocessConfig {
    // Intra-year seasonal differences need at least 14 months.
    int series_length = 24;
    ConsumptionColumn column = ConsumptionColumn::measured;
    bool drop_all_zero = true;
    int worker_count = 1;

    void validate() const {
        if (series_length < 14)
            throw Error(ErrorCode::invalid_config, "series_length must be >= 14");
        if (worker_count < 1)
            throw Error(ErrorCode::invalid_config, "worker_count must be >= 1");
    }
};

struct LoadStats {
    std::size_t rows_total = 0;
    std::size_t rows_loaded = 0;
    std::size_t rows_dropped = 0;
};

struct ConsumptionLoadResult {
    std::vector<ConsumptionRecord> records;
    LoadStats stats;
};

struct InspectionLoadResult {
    std::vector<InspectionRecord> records;
    LoadStats stats;
};

// Reads the semicolon consumption CSV. Rows with unparseable dates or values
// (including negative or non-finite kWh) are dropped and counted.
inline ConsumptionLoadResult load_consumptions(const std::string& path) {
    const auto table = csv::read_file(path);
    const std::size_t id_col = table.column("customer_id");
    const std::size_t date_col = table.column("reading_date");
    const std::size_t measured_col = table.column("kwh_measured");
    const std::size_t billed_col = table.column("kwh_billed");

    ConsumptionLoadResult result;
    result.stats.rows_total = table.rows.size();
    result.records.reserve(table.rows.size());
    const std::size_t needed = std::max({id_col, date_col, measured_col, billed_col}) + 1;
    for (const auto& row : table.rows) {
        if (row.size() < needed || row[id_col].empty()) {
            ++result.stats.rows_dropped;
            continue;
        }
        const auto date = parse_iso_date(row[date_col]);
        const auto measured = csv::parse_double(row[measured_col]);
        const auto billed = csv::parse_double(row[billed_col]);
        if (!date || !measured || !billed || *measured < 0.0 || *billed < 0.0) {
            ++result.stats.rows_dropped;
            continue;
        }
        result.records.push_back({row[id_col], *date, *measured, *billed});
    }
    result.stats.rows_loaded = result.records.size();
    return result;
}

// Reads the semicolon inspection CSV. Rows whose label is not exactly 0 or 1
// are dropped and counted, as are unparseable dates.
inline InspectionLoadResult load_inspections(const std::string& path) {
    const auto table = csv::read_file(path);
    const std::size_t id_col = table.column("customer_id");
    const std::size_t date_col = table.column("inspection_date");
    const std::size_t label_col = table.column("ntl_found");

    InspectionLoadResult result;
    result.stats.rows_total = table.rows.size();
    result.records.reserve(table.rows.size());
    const std::size_t needed = std::max({id_col, date_col, label_col}) + 1;
    for (const auto& row : table.rows) {
        if (row.size() < needed || row[id_col].empty()) {
            ++result.stats.rows_dropped;
            continue;
        }
        const auto date = parse_iso_date(row[date_col]);
        const auto label = csv::parse_double(row[label_col]);
        if (!date || !label || (*label != 0.0 && *label != 1.0)) {
            ++result.stats.rows_dropped;
            continue;
        }
        result.records.push_back({row[id_col], *date, static_cast<int>(*label)});
    }
    result.stats.rows_loaded = result.records.size();
    return result;
}

// Keeps, per customer, the inspection with the latest date. Among equal
// dates the record appearing last in file order wins.
inline std::map<std::string, InspectionRecord> latest_inspection_per_customer(
    const std::vector<InspectionRecord>& inspections) {
    std::map<std::string, InspectionRecord> latest;
    for (const auto& record : inspections) {
        auto it = latest.find(record.customer_id);
        if (it == latest.end() || !(record.inspection_date < it->second.inspection_date))
            latest[record.customer_id] = record;
    }
    return latest;
}

struct RejectionStats {
    std::size_t customers_considered = 0;
    std::size_t accepted = 0;
    std::size_t rejected_wrong_length = 0;
    std::size_t rejected_gap_in_months = 0;
    std::size_t rejected_non_monotone = 0;
    std::size_t rejected_all_zero = 0;

    std::size_t rejected_total() const {
        return rejected_wrong_length + rejected_gap_in_months + rejected_non_monotone +
               rejected_all_zero;
    }
};

struct DatasetProvenance {
    PreprocessConfig config;
    std::uint64_t consumption_digest = 0;
    std::uint64_t inspection_digest = 0;
};

struct SeriesDataset {
    std::vector<CustomerSeries> series;
    int series_length = 0;
    DatasetProvenance provenance;

    std::size_t size() const { return series.size(); }

    TargetVector target() const {
        TargetVector t;
        t.customer_ids.reserve(series.size());
        t.labels.reserve(series.size());
        for (const auto& s : series) {
            t.customer_ids.push_back(s.customer_id);
            t.labels.push_back(s.label);
        }
        return t;
    }

    // Equality is over content, not provenance.
    bool operator==(const SeriesDataset& other) const {
        return series_length == other.series_length && series == other.series;
    }
};

namespace detail {

struct CustomerWindowInput {
    std::string customer_id;
    std::vector<ConsumptionRecord> readings;  // file order
    InspectionRecord inspection;
};

// Build one customer's window, or report why it was rejected.
inline std::pair<SeriesVerdict, CustomerSeries> build_one_window(
    CustomerWindowInput& input, const PreprocessConfig& config, bool& all_zero) {
    all_zero = false;
    auto& readings = input.readings;

    // Stable sort keeps file order among equal dates; for duplicate months the
    // later date wins, then the later file position.
    std::stable_sort(readings.begin(), readings.end(),
                     [](const ConsumptionRecord& a, const ConsumptionRecord& b) {
                         return a.reading_date < b.reading_date;
                     });
    std::vector<const ConsumptionRecord*> monthly;
    for (const auto& record : readings) {
        if (!monthly.empty() &&
            monthly.back()->reading_date.month_index() == record.reading_date.month_index()) {
            monthly.back() = &record;
        } else {
            monthly.push_back(&record);
        }
    }

    // Anchor: latest reading at or before the inspection date.
    std::ptrdiff_t anchor = -1;
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(monthly.size()) - 1; i >= 0; --i) {
        if (!(input.inspection.inspection_date < monthly[i]->reading_date)) {
            anchor = i;
            break;
        }
    }
    const std::ptrdiff_t n = config.series_length;
    if (anchor < 0 || anchor + 1 < n) return {SeriesVerdict::wrong_length, {}};

    CustomerSeries series;
    series.customer_id = input.customer_id;
    series.label = input.inspection.ntl_found;
    series.consumptions.reserve(n);
    series.reading_dates.reserve(n);
    for (std::ptrdiff_t i = anchor - n + 1; i <= anchor; ++i) {
        const auto& record = *monthly[i];
        series.consumptions.push_back(config.column == ConsumptionColumn::measured
                                          ? record.kwh_measured
                                          : record.kwh_billed);
        series.reading_dates.push_back(record.reading_date);
    }

    const SeriesVerdict verdict = validate_customer_series(series, static_cast<std::size_t>(n));
    if (verdict != SeriesVerdict::ok) return {verdict, {}};

    if (config.drop_all_zero) {
        all_zero = std::all_of(series.consumptions.begin(), series.consumptions.end(),
                               [](double c) { return c == 0.0; });
        if (all_zero) return {SeriesVerdict::ok, {}};
    }
    return {SeriesVerdict::ok, std::move(series)};
}

}  // namespace detail

struct BuildWindowsResult {
    SeriesDataset dataset;
    RejectionStats stats;
};

// Matches every inspected customer's consumption history against their latest
// inspection and keeps the N consecutive monthly readings ending at the last
// reading on or before the inspection date. Customers are processed as
// independent units; worker scheduling never changes the output because
// results are merged into per-customer slots and the map is already sorted.
inline BuildWindowsResult build_windows(const std::vector<ConsumptionRecord>& consumptions,
                                        const std::map<std::string, InspectionRecord>& latest_inspections,
                                        const PreprocessConfig& config) {
    config.validate();

    // Inner join: only inspected customers are grouped.
    std::unordered_map<std::string, std::size_t> slot_of;
    std::vector<detail::CustomerWindowInput> inputs;
    inputs.reserve(latest_inspections.size());
    for (const auto& [customer_id, inspection] : latest_inspections) {
        slot_of.emplace(customer_id, inputs.size());
        inputs.push_back({customer_id, {}, inspection});
    }
    for (const auto& record : consumptions) {
        auto it = slot_of.find(record.customer_id);
        if (it != slot_of.end()) inputs[it->second].readings.push_back(record);
    }

    struct Outcome {
        SeriesVerdict verdict = SeriesVerdict::ok;
        bool all_zero = false;
        CustomerSeries series;
    };
    std::vector<Outcome> outcomes(inputs.size());
    detail::run_partitioned(inputs.size(), config.worker_count, [&](std::size_t i) {
        auto& out = outcomes[i];
        auto [verdict, series] = detail::build_one_window(inputs[i], config, out.all_zero);
        out.verdict = verdict;
        out.series = std::move(series);
    });

    BuildWindowsResult result;
    result.stats.customers_considered = inputs.size();
    result.dataset.series_length = config.series_length;
    result.dataset.provenance.config = config;
    for (auto& out : outcomes) {
        switch (out.verdict) {
            case SeriesVerdict::wrong_length: ++result.stats.rejected_wrong_length; continue;
            case SeriesVerdict::gap_in_months: ++result.stats.rejected_gap_in_months; continue;
            case SeriesVerdict::non_monotone_dates: ++result.stats.rejected_non_monotone; continue;
            case SeriesVerdict::ok: break;
        }
        if (out.all_zero) {
            ++result.stats.rejected_all_zero;
            continue;
        }
        result.dataset.series.push_back(std::move(out.series));
    }
    // inputs came from an ordered map, so this is already sorted; keep the
    // explicit sort as the determinism guarantee for any partition scheme.
    std::sort(result.dataset.series.begin(), result.dataset.series.end(),
              [](const CustomerSeries& a, const CustomerSeries& b) {
                  return a.customer_id < b.customer_id;
              });
    result.stats.accepted = result.dataset.series.size();
    if (result.dataset.series.empty())
        throw Error(ErrorCode::empty_result, "no customer survived preprocessing");
    return result;
}

// Persisted dataset: one row per customer,
// customer_id;label;date_0;c_0;...;date_{N-1};c_{N-1}
inline void save_dataset(const SeriesDataset& dataset, const std::string& path) {
    csv::Writer writer(path);
    std::vector<std::string> header{"customer_id", "label"};
    for (int d = 0; d < dataset.series_length; ++d) {
        header.push_back("date_" + std::to_string(d));
        header.push_back("c_" + std::to_string(d));
    }
    writer.row(header);
    for (const auto& series : dataset.series) {
        std::vector<std::string> row{series.customer_id, std::to_string(series.label)};
        for (std::size_t d = 0; d < series.length(); ++d) {
            row.push_back(series.reading_dates[d].to_iso());
            row.push_back(csv::format_double(series.consumptions[d]));
        }
        writer.row(row);
    }
}

inline SeriesDataset load_dataset(const std::string& path) {
    const auto table = csv::read_file(path);
    if (table.header.size() < 4 || table.header[0] != "customer_id" || table.header[1] != "label" ||
        table.header.size() % 2 != 0)
        throw Error(ErrorCode::schema_mismatch, "unexpected dataset header in " + path);
    const int n = static_cast<int>((table.header.size() - 2) / 2);

    SeriesDataset dataset;
    dataset.series_length = n;
    dataset.series.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw Error(ErrorCode::schema_mismatch, "wrong column count in " + path);
        CustomerSeries series;
        series.customer_id = row[0];
        const auto label = csv::parse_int(row[1]);
        if (!label || (*label != 0 && *label != 1))
            throw Error(ErrorCode::schema_mismatch, "bad label for customer " + row[0]);
        series.label = static_cast<int>(*label);
        for (int d = 0; d < n; ++d) {
            const auto date = parse_iso_date(row[2 + 2 * d]);
            const auto value = csv::parse_double(row[3 + 2 * d]);
            if (!date || !value)
                throw Error(ErrorCode::schema_mismatch, "bad cell for customer " + row[0]);
            series.reading_dates.push_back(*date);
            series.consumptions.push_back(*value);
        }
        if (validate_customer_series(series, static_cast<std::size_t>(n)) != SeriesVerdict::ok)
            throw Error(ErrorCode::schema_mismatch, "invalid series for customer " + row[0]);
        dataset.series.push_back(std::move(series));
    }
    return dataset;
}

}  // namespace ntl
