#include <gtest/gtest.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ntl/ingest.hpp"
#include "ntl/rng.hpp"
#include "ntl/synth.hpp"

using namespace ntl;

namespace {

class TempDir {
public:
    TempDir() {
        path_ = std::filesystem::temp_directory_path() /
                ("ntl_ingest_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }

    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    static inline int counter_ = 0;
    std::filesystem::path path_;
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

// A clean 24-month customer ending right before their inspection.
std::string consumption_block(const std::string& id, int start_month_index, int months,
                              double level = 10.0) {
    std::string text;
    for (int d = 0; d < months; ++d) {
        const Date date = date_from_month_index(start_month_index + d, 15);
        text += id + ";" + date.to_iso() + ";" + csv::format_double(level) + ";" +
                csv::format_double(level) + "\n";
    }
    return text;
}

constexpr const char* kConsumptionHeader = "customer_id;reading_date;kwh_measured;kwh_billed\n";
constexpr const char* kInspectionHeader = "customer_id;inspection_date;ntl_found\n";

}  // namespace

TEST(LoadConsumptions, DropsAndCountsBadRows) {
    TempDir dir;
    const auto path = dir.file("c.csv");
    write_file(path, std::string(kConsumptionHeader) +
                         "A;2015-01-15;10;11\n"
                         "A;??;10;11\n"
                         "B;2015-02-15;3.5;3\n"
                         "C;2015-03-15;-1;2\n"
                         "D;2015-04-15;7;8\n");
    const auto result = load_consumptions(path);
    EXPECT_EQ(result.records.size(), 3u);
    EXPECT_EQ(result.stats.rows_total, 5u);
    EXPECT_EQ(result.stats.rows_dropped, 2u);
    EXPECT_EQ(result.stats.rows_loaded + result.stats.rows_dropped, result.stats.rows_total);
}

TEST(LoadConsumptions, EmptyFileWithHeaderGivesEmptyList) {
    TempDir dir;
    const auto path = dir.file("c.csv");
    write_file(path, kConsumptionHeader);
    const auto result = load_consumptions(path);
    EXPECT_TRUE(result.records.empty());
}

TEST(LoadConsumptions, MissingColumnIsHeaderMismatch) {
    TempDir dir;
    const auto path = dir.file("c.csv");
    write_file(path, "customer_id;reading_date;kwh_measured\nA;2015-01-15;10\n");
    try {
        load_consumptions(path);
        FAIL() << "expected HeaderMismatch";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::header_mismatch);
    }
}

TEST(LoadConsumptions, MissingFileIsUnreadable) {
    try {
        load_consumptions("/nonexistent/file.csv");
        FAIL() << "expected FileUnreadable";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::file_unreadable);
    }
}

TEST(LoadInspections, DropsOutOfRangeLabels) {
    TempDir dir;
    const auto path = dir.file("i.csv");
    write_file(path, std::string(kInspectionHeader) +
                         "A;2017-01-10;0\n"
                         "B;2017-01-10;1\n"
                         "C;2017-01-10;7\n"
                         "D;2017-01-10;1\n");
    const auto result = load_inspections(path);
    EXPECT_EQ(result.records.size(), 3u);
    EXPECT_EQ(result.stats.rows_dropped, 1u);
}

TEST(LoadInspections, KeepsDuplicatesForLaterResolution) {
    TempDir dir;
    const auto path = dir.file("i.csv");
    write_file(path, std::string(kInspectionHeader) +
                         "A;2017-01-10;0\n"
                         "A;2017-01-10;1\n");
    const auto result = load_inspections(path);
    EXPECT_EQ(result.records.size(), 2u);
}

TEST(LatestInspection, PicksMaximalDate) {
    std::vector<InspectionRecord> inspections{
        {"A", Date{2015, 1, 10}, 0},
        {"A", Date{2016, 3, 10}, 1},
        {"B", Date{2015, 6, 1}, 0},
    };
    const auto latest = latest_inspection_per_customer(inspections);
    ASSERT_EQ(latest.size(), 2u);
    EXPECT_EQ(latest.at("A").inspection_date, (Date{2016, 3, 10}));
    EXPECT_EQ(latest.at("A").ntl_found, 1);
    EXPECT_EQ(latest.at("B").ntl_found, 0);
}

TEST(LatestInspection, EqualDatesKeepLastInFileOrder) {
    std::vector<InspectionRecord> inspections{
        {"A", Date{2016, 3, 10}, 0},
        {"A", Date{2016, 3, 10}, 1},
    };
    EXPECT_EQ(latest_inspection_per_customer(inspections).at("A").ntl_found, 1);
    std::swap(inspections[0], inspections[1]);
    EXPECT_EQ(latest_inspection_per_customer(inspections).at("A").ntl_found, 0);
}

TEST(BuildWindows, KeepsConformingCustomer) {
    TempDir dir;
    const int start = Date{2015, 1, 1}.month_index();
    write_file(dir.file("c.csv"), kConsumptionHeader + consumption_block("A", start, 24));
    write_file(dir.file("i.csv"), std::string(kInspectionHeader) + "A;2017-01-05;1\n");
    const auto consumptions = load_consumptions(dir.file("c.csv"));
    const auto latest = latest_inspection_per_customer(load_inspections(dir.file("i.csv")).records);

    PreprocessConfig config;
    config.series_length = 24;
    const auto result = build_windows(consumptions.records, latest, config);
    ASSERT_EQ(result.dataset.series.size(), 1u);
    EXPECT_EQ(result.dataset.series[0].label, 1);
    EXPECT_EQ(result.dataset.series[0].length(), 24u);
    EXPECT_EQ(result.stats.accepted, 1u);
}

TEST(BuildWindows, RejectsGapInsideWindow) {
    const int start = Date{2015, 1, 1}.month_index();
    std::vector<ConsumptionRecord> records;
    for (int d = 0; d < 25; ++d) {
        if (d == 12) continue;  // one missing month
        records.push_back({"A", date_from_month_index(start + d, 15), 10.0, 10.0});
    }
    std::map<std::string, InspectionRecord> latest{
        {"A", {"A", Date{2017, 2, 5}, 0}}};
    PreprocessConfig config;
    config.series_length = 24;
    try {
        build_windows(records, latest, config);
        FAIL() << "expected EmptyResult after the only customer is rejected";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::empty_result);
    }
}

TEST(BuildWindows, RejectsAllZeroWhenConfigured) {
    const int start = Date{2015, 1, 1}.month_index();
    std::vector<ConsumptionRecord> records;
    for (int d = 0; d < 24; ++d)
        records.push_back({"A", date_from_month_index(start + d, 15), 0.0, 0.0});
    for (int d = 0; d < 24; ++d)
        records.push_back({"B", date_from_month_index(start + d, 15), 5.0, 5.0});
    std::map<std::string, InspectionRecord> latest{
        {"A", {"A", Date{2017, 1, 5}, 0}},
        {"B", {"B", Date{2017, 1, 5}, 1}},
    };
    PreprocessConfig config;
    config.series_length = 24;
    config.drop_all_zero = true;
    const auto result = build_windows(records, latest, config);
    EXPECT_EQ(result.dataset.series.size(), 1u);
    EXPECT_EQ(result.dataset.series[0].customer_id, "B");
    EXPECT_EQ(result.stats.rejected_all_zero, 1u);

    config.drop_all_zero = false;
    const auto kept = build_windows(records, latest, config);
    EXPECT_EQ(kept.dataset.series.size(), 2u);
}

TEST(BuildWindows, AnchorsAtLastReadingBeforeInspection) {
    // 30 months of history; inspection in month 25 => window is months 2..25.
    const int start = Date{2014, 1, 1}.month_index();
    std::vector<ConsumptionRecord> records;
    for (int d = 0; d < 30; ++d)
        records.push_back({"A", date_from_month_index(start + d, 15), static_cast<double>(d), 0.0});
    std::map<std::string, InspectionRecord> latest{
        {"A", {"A", date_from_month_index(start + 25, 20), 1}}};
    PreprocessConfig config;
    config.series_length = 24;
    const auto result = build_windows(records, latest, config);
    ASSERT_EQ(result.dataset.series.size(), 1u);
    EXPECT_DOUBLE_EQ(result.dataset.series[0].consumptions.back(), 25.0);
    EXPECT_DOUBLE_EQ(result.dataset.series[0].consumptions.front(), 2.0);
}

TEST(BuildWindows, ReadingOnInspectionDayIsIncluded) {
    const int start = Date{2015, 1, 1}.month_index();
    std::vector<ConsumptionRecord> records;
    for (int d = 0; d < 24; ++d)
        records.push_back({"A", date_from_month_index(start + d, 15), static_cast<double>(d), 0.0});
    std::map<std::string, InspectionRecord> latest{
        {"A", {"A", date_from_month_index(start + 23, 15), 1}}};
    PreprocessConfig config;
    config.series_length = 24;
    const auto result = build_windows(records, latest, config);
    ASSERT_EQ(result.dataset.series.size(), 1u);
    EXPECT_DOUBLE_EQ(result.dataset.series[0].consumptions.back(), 23.0);
}

TEST(BuildWindows, DuplicateMonthKeepsLatestReading) {
    const int start = Date{2015, 1, 1}.month_index();
    std::vector<ConsumptionRecord> records;
    for (int d = 0; d < 24; ++d)
        records.push_back({"A", date_from_month_index(start + d, 15), 1.0, 1.0});
    // A second reading in month 5, later in the month: it must win.
    records.push_back({"A", date_from_month_index(start + 5, 28), 99.0, 99.0});
    std::map<std::string, InspectionRecord> latest{
        {"A", {"A", Date{2017, 1, 5}, 0}}};
    PreprocessConfig config;
    config.series_length = 24;
    const auto result = build_windows(records, latest, config);
    ASSERT_EQ(result.dataset.series.size(), 1u);
    EXPECT_DOUBLE_EQ(result.dataset.series[0].consumptions[5], 99.0);
}

TEST(BuildWindows, CountConservationOverRandomFixtures) {
    Rng rng(2024);
    for (int trial = 0; trial < 5; ++trial) {
        const int n_customers = 50 + static_cast<int>(rng.below(200));
        std::vector<ConsumptionRecord> records;
        std::map<std::string, InspectionRecord> latest;
        const int start = Date{2014, 1, 1}.month_index();
        for (int i = 0; i < n_customers; ++i) {
            char id[16];
            std::snprintf(id, sizeof id, "K%04d", i);
            const int months = 10 + static_cast<int>(rng.below(30));
            const bool all_zero = rng.below(10) == 0;
            for (int d = 0; d < months; ++d) {
                if (rng.below(40) == 0) continue;  // random gaps
                records.push_back({id, date_from_month_index(start + d, 15),
                                   all_zero ? 0.0 : rng.uniform01() * 50.0, 1.0});
            }
            latest[id] = {id, date_from_month_index(start + months, 3),
                          static_cast<int>(rng.below(2))};
        }
        PreprocessConfig config;
        config.series_length = 24;
        config.drop_all_zero = true;
        try {
            const auto result = build_windows(records, latest, config);
            EXPECT_EQ(result.stats.customers_considered,
                      result.stats.accepted + result.stats.rejected_total());
            for (const auto& s : result.dataset.series)
                EXPECT_EQ(validate_customer_series(s, 24), SeriesVerdict::ok);
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::empty_result);
        }
    }
}

TEST(BuildWindows, RowShufflePermutationInvariance) {
    // Shuffling input rows must not change the output (fixtures avoid
    // same-date duplicate collisions, where file order is the documented
    // tie-break).
    Rng rng(55);
    const int start = Date{2014, 6, 1}.month_index();
    std::vector<ConsumptionRecord> records;
    std::map<std::string, InspectionRecord> latest;
    for (int i = 0; i < 40; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "P%03d", i);
        for (int d = 0; d < 26; ++d)
            records.push_back({id, date_from_month_index(start + d, 10 + static_cast<int>(rng.below(5))),
                               rng.uniform01() * 20.0, 2.0});
        latest[id] = {id, date_from_month_index(start + 26, 1), static_cast<int>(rng.below(2))};
    }
    PreprocessConfig config;
    config.series_length = 24;
    const auto baseline = build_windows(records, latest, config);

    auto shuffled = records;
    rng.shuffle(shuffled);
    const auto permuted = build_windows(shuffled, latest, config);
    EXPECT_EQ(baseline.dataset, permuted.dataset);

    // Worker count must not change the result either.
    config.worker_count = 8;
    const auto parallel = build_windows(shuffled, latest, config);
    EXPECT_EQ(baseline.dataset, parallel.dataset);
}

TEST(Dataset, SaveLoadRoundTrip) {
    TempDir dir;
    SeriesDataset dataset;
    dataset.series_length = 14;
    const int start = Date{2015, 3, 1}.month_index();
    for (int i = 0; i < 2; ++i) {
        CustomerSeries s;
        s.customer_id = i == 0 ? "A" : "B";
        s.label = i;
        Rng rng(100 + i);
        for (int d = 0; d < 14; ++d) {
            s.consumptions.push_back(rng.uniform01() * 123.456);
            s.reading_dates.push_back(date_from_month_index(start + d, 10 + i));
        }
        dataset.series.push_back(s);
    }
    const auto path = dir.file("dataset.csv");
    save_dataset(dataset, path);
    EXPECT_EQ(load_dataset(path), dataset);
}

TEST(Dataset, EmptyDatasetSavesHeaderOnly) {
    TempDir dir;
    SeriesDataset dataset;
    dataset.series_length = 14;
    const auto path = dir.file("dataset.csv");
    save_dataset(dataset, path);
    const auto loaded = load_dataset(path);
    EXPECT_TRUE(loaded.series.empty());
    EXPECT_EQ(loaded.series_length, 14);
}

TEST(Dataset, WrongColumnCountIsSchemaMismatch) {
    TempDir dir;
    const auto path = dir.file("dataset.csv");
    write_file(path, "customer_id;label;date_0;c_0\nA;1;2015-01-15\n");
    try {
        load_dataset(path);
        FAIL() << "expected SchemaMismatch";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::schema_mismatch);
    }
}
