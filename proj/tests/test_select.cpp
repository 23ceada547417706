#include <gtest/gtest.h>

#include <cmath>

#include "ntl/select.hpp"
#include "ntl/rng.hpp"
#include "oracles.hpp"

using namespace ntl;

namespace {

FeatureMatrix matrix_from_columns(const std::vector<std::vector<double>>& columns) {
    FeatureMatrix matrix;
    const std::size_t rows = columns.empty() ? 0 : columns[0].size();
    for (std::size_t c = 0; c < columns.size(); ++c) {
        FeatureName name{FeatureFamily::GTS, "col" + std::to_string(c), {}};
        matrix.columns.push_back(name);
    }
    matrix.data = DataMatrix(rows, columns.size());
    for (std::size_t r = 0; r < rows; ++r) {
        matrix.customer_ids.push_back("R" + std::to_string(r));
        for (std::size_t c = 0; c < columns.size(); ++c) matrix.data.at(r, c) = columns[c][r];
    }
    return matrix;
}

TargetVector target_from(const std::vector<int>& labels) {
    TargetVector target;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        target.customer_ids.push_back("R" + std::to_string(i));
        target.labels.push_back(labels[i]);
    }
    return target;
}

}  // namespace

TEST(BinaryFeature, DetectsExactlyTwoDistinctValues) {
    EXPECT_TRUE(is_binary_feature(std::vector<double>{0, 1, 1, 0}));
    EXPECT_FALSE(is_binary_feature(std::vector<double>{0.1, 0.2, 0.3}));
    EXPECT_FALSE(is_binary_feature(std::vector<double>{5, 5, 5}));
}

TEST(Fisher, IndependentTableIsOne) {
    EXPECT_DOUBLE_EQ(fisher_exact_p(2, 2, 2, 2), 1.0);
}

TEST(Fisher, DiagonalFiveByFive) {
    // Both extreme tables have probability 1/252; two-sided p = 2/252.
    EXPECT_NEAR(fisher_exact_p(5, 0, 0, 5), 2.0 / 252.0, 1e-12);
    EXPECT_NEAR(oracle::fisher_enumeration(5, 0, 0, 5), 2.0 / 252.0, 1e-15);
}

TEST(Fisher, TinyDiagonalIsOne) {
    EXPECT_NEAR(fisher_exact_p(1, 0, 0, 1), 1.0, 1e-12);
}

TEST(Fisher, DegenerateMarginThrows) {
    try {
        fisher_exact_p(0, 0, 3, 4);
        FAIL() << "expected DegenerateMargins";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::degenerate_margins);
    }
}

TEST(Fisher, MatchesEnumerationForAllSmallMargins) {
    // Every table with all margins <= 12 and none zero.
    for (std::int64_t a = 0; a <= 12; ++a)
        for (std::int64_t b = 0; b <= 12 - a; ++b)
            for (std::int64_t c = 0; c <= 12 - a; ++c) {
                if (a + b == 0 || a + c > 12) continue;
                for (std::int64_t d = 0; d <= std::min(12 - c, 12 - b); ++d) {
                    if (c + d == 0 || a + c == 0 || b + d == 0) continue;
                    EXPECT_NEAR(fisher_exact_p(a, b, c, d),
                                oracle::fisher_enumeration(a, b, c, d), 1e-12)
                        << a << ' ' << b << ' ' << c << ' ' << d;
                }
            }
}

TEST(Fisher, InvariantUnderSimultaneousRowAndColumnSwap) {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const std::int64_t a = 1 + static_cast<std::int64_t>(rng.below(10));
        const std::int64_t b = 1 + static_cast<std::int64_t>(rng.below(10));
        const std::int64_t c = 1 + static_cast<std::int64_t>(rng.below(10));
        const std::int64_t d = 1 + static_cast<std::int64_t>(rng.below(10));
        EXPECT_NEAR(fisher_exact_p(a, b, c, d), fisher_exact_p(d, c, b, a), 1e-12);
    }
}

TEST(Ks, IdenticalSamplesGiveZeroAndOne) {
    const std::vector<double> x{1.0, 2.0, 3.0};
    const auto result = ks_two_sample(x, x);
    EXPECT_DOUBLE_EQ(result.statistic, 0.0);
    EXPECT_DOUBLE_EQ(result.p_value, 1.0);
}

TEST(Ks, DisjointSupportsGiveOne) {
    EXPECT_DOUBLE_EQ(ks_two_sample(std::vector<double>{0, 1, 2},
                                   std::vector<double>{10, 11, 12}).statistic,
                     1.0);
}

TEST(Ks, HalfOverlapGivesHalf) {
    EXPECT_DOUBLE_EQ(
        ks_two_sample(std::vector<double>{1, 2}, std::vector<double>{1, 3}).statistic, 0.5);
}

TEST(Ks, StatisticMatchesEnumerationOnRandomPairs) {
    Rng rng(2718);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> a(1 + rng.below(50)), b(1 + rng.below(50));
        for (auto& v : a) v = std::round(rng.uniform01() * 20.0) / 2.0;
        for (auto& v : b) v = std::round(rng.uniform01() * 20.0) / 2.0;
        const auto result = ks_two_sample(a, b);
        EXPECT_NEAR(result.statistic, oracle::ks_statistic_enumeration(a, b), 1e-12);
        EXPECT_GE(result.statistic, 0.0);
        EXPECT_LE(result.statistic, 1.0);
        // Symmetry in sample swap.
        EXPECT_DOUBLE_EQ(result.statistic, ks_two_sample(b, a).statistic);
        EXPECT_GT(result.p_value, 0.0);
        EXPECT_LE(result.p_value, 1.0);
    }
}

TEST(Ks, EmptySampleThrows) {
    try {
        ks_two_sample(std::vector<double>{}, std::vector<double>{1.0});
        FAIL() << "expected EmptySample";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::empty_sample);
    }
}

TEST(FeaturePValues, LabelCopyIsTinyAndConstantIsOne) {
    std::vector<int> labels;
    std::vector<double> copy_column, constant_column, noisy_column;
    Rng rng(9);
    for (int i = 0; i < 40; ++i) {
        const int label = i % 2;
        labels.push_back(label);
        copy_column.push_back(label);
        constant_column.push_back(3.25);
        noisy_column.push_back(rng.uniform01());
    }
    const auto matrix = matrix_from_columns({copy_column, constant_column, noisy_column});
    const auto table = feature_p_values(matrix, target_from(labels));
    ASSERT_EQ(table.entries.size(), 3u);
    EXPECT_EQ(table.entries[0].test, TestKind::fisher);
    EXPECT_LT(table.entries[0].p_value, 0.001);
    EXPECT_DOUBLE_EQ(table.entries[1].p_value, 1.0);
    EXPECT_EQ(table.entries[2].test, TestKind::ks);
}

TEST(FeaturePValues, SingleClassTargetThrows) {
    const auto matrix = matrix_from_columns({{1.0, 2.0, 3.0}});
    try {
        feature_p_values(matrix, target_from({1, 1, 1}));
        FAIL() << "expected SingleClassTarget";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::single_class_target);
    }
}

TEST(BenjaminiHochberg, HandComputedExample) {
    const auto mask = benjamini_hochberg({0.01, 0.04, 0.03, 0.2}, 0.05);
    EXPECT_EQ(mask, (std::vector<char>{1, 0, 0, 0}));
}

TEST(BenjaminiHochberg, AllZerosRetainAll) {
    const auto mask = benjamini_hochberg({0.0, 0.0, 0.0}, 0.05);
    EXPECT_EQ(mask, (std::vector<char>{1, 1, 1}));
}

TEST(BenjaminiHochberg, AllOnesRetainNone) {
    const auto mask = benjamini_hochberg({1.0, 1.0, 1.0}, 0.05);
    EXPECT_EQ(mask, (std::vector<char>{0, 0, 0}));
}

TEST(BenjaminiHochberg, MatchesThresholdScanOracle) {
    Rng rng(31415);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> p(1 + rng.below(20));
        for (auto& v : p) v = rng.uniform01();
        // Mix in ties and extremes now and then.
        if (!p.empty() && rng.below(3) == 0) p[rng.below(p.size())] = 0.0;
        if (p.size() > 1 && rng.below(3) == 0) p[rng.below(p.size())] = p[0];
        const double q = 0.01 + rng.uniform01() * 0.98;
        EXPECT_EQ(benjamini_hochberg(p, q), oracle::bh_threshold_scan(p, q));
    }
}

TEST(BenjaminiHochberg, MonotoneInQ) {
    Rng rng(161803);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> p(2 + rng.below(15));
        for (auto& v : p) v = rng.uniform01();
        double q1 = 0.01 + rng.uniform01() * 0.5;
        double q2 = q1 + rng.uniform01() * (0.98 - q1);
        const auto narrow = benjamini_hochberg(p, q1);
        const auto wide = benjamini_hochberg(p, q2);
        for (std::size_t i = 0; i < p.size(); ++i)
            EXPECT_LE(narrow[i], wide[i]) << "q1=" << q1 << " q2=" << q2;
    }
}

TEST(SelectFeatures, RetainsLabelCopyDropsConstant) {
    std::vector<int> labels;
    std::vector<double> copy_column, constant_column;
    for (int i = 0; i < 40; ++i) {
        labels.push_back(i % 2);
        copy_column.push_back(i % 2);
        constant_column.push_back(1.0);
    }
    const auto matrix = matrix_from_columns({copy_column, constant_column});
    const auto result = select_features(matrix, target_from(labels), 0.05);
    ASSERT_EQ(result.retained.n_cols(), 1u);
    EXPECT_EQ(result.retained.columns[0].calculator, "col0");
    EXPECT_EQ(result.table.retained_mask, (std::vector<char>{1, 0}));
}

TEST(SelectFeatures, WiderQRetainsSuperset) {
    Rng rng(99);
    std::vector<int> labels;
    std::vector<std::vector<double>> columns(6);
    for (int i = 0; i < 60; ++i) {
        const int label = static_cast<int>(rng.below(2));
        labels.push_back(label);
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const double signal = c < 3 ? 0.4 * label : 0.0;
            columns[c].push_back(signal + rng.uniform01());
        }
    }
    const auto matrix = matrix_from_columns(columns);
    const auto narrow = select_features(matrix, target_from(labels), 0.05);
    const auto wide = select_features(matrix, target_from(labels), 0.9);
    for (std::size_t c = 0; c < columns.size(); ++c)
        EXPECT_LE(narrow.table.retained_mask[c], wide.table.retained_mask[c]);
}

TEST(SelectFeatures, EmptyRetentionIsValid) {
    Rng rng(123);
    std::vector<int> labels;
    std::vector<std::vector<double>> columns(4);
    for (int i = 0; i < 50; ++i) {
        labels.push_back(static_cast<int>(rng.below(2)));
        for (auto& column : columns) column.push_back(rng.uniform01());
    }
    const auto matrix = matrix_from_columns(columns);
    const auto result = select_features(matrix, target_from(labels), 0.01);
    EXPECT_EQ(result.table.entries.size(), 4u);
    EXPECT_EQ(result.retained.n_rows(), 50u);
    // Pure noise at q=0.01 on four columns: expect empty or near-empty.
    EXPECT_LE(result.retained.n_cols(), 1u);
}

TEST(SelectFeatures, PermutedLabelsRetainLittle) {
    // Soft statistical check: with labels shuffled, retention at q=0.05
    // averages well below 10% of columns.
    Rng rng(424242);
    const int n = 60, n_cols = 8;
    std::vector<std::vector<double>> columns(n_cols);
    for (int i = 0; i < n; ++i)
        for (auto& column : columns) column.push_back(rng.uniform01());
    const auto matrix = matrix_from_columns(columns);

    double retained_fraction_sum = 0.0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<int> labels(n);
        for (int i = 0; i < n; ++i) labels[i] = i < n / 2 ? 1 : 0;
        rng.shuffle(labels);
        const auto result = select_features(matrix, target_from(labels), 0.05);
        retained_fraction_sum +=
            static_cast<double>(result.retained.n_cols()) / static_cast<double>(n_cols);
    }
    EXPECT_LT(retained_fraction_sum / trials, 0.10);
}

TEST(PValueTableCsv, WritesOneRowPerFeature) {
    std::vector<int> labels;
    std::vector<double> column;
    for (int i = 0; i < 20; ++i) {
        labels.push_back(i % 2);
        column.push_back(i);
    }
    const auto matrix = matrix_from_columns({column});
    const auto result = select_features(matrix, target_from(labels), 0.05);
    const std::string path = "/tmp/ntl_pvalues_test.csv";
    save_p_value_table(result.table, path);
    const auto table = csv::read_file(path);
    EXPECT_EQ(table.header,
              (std::vector<std::string>{"feature", "test", "p_value", "retained"}));
    EXPECT_EQ(table.rows.size(), 1u);
    std::remove(path.c_str());
}
