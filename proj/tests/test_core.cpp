#include <gtest/gtest.h>

#include "ntl/core.hpp"
#include "ntl/rng.hpp"

using namespace ntl;

namespace {

CustomerSeries consecutive_series(int n, int start_month_index = Date{2015, 1, 1}.month_index(),
                                  double value = 5.0) {
    CustomerSeries s;
    s.customer_id = "A";
    for (int d = 0; d < n; ++d) {
        s.consumptions.push_back(value);
        s.reading_dates.push_back(date_from_month_index(start_month_index + d, 15));
    }
    return s;
}

}  // namespace

TEST(FeatureName, FormatsCanonically) {
    FeatureName fixed{FeatureFamily::DIF, "fixed_interval", {{"K", "3"}, {"d", "12"}}};
    EXPECT_EQ(format_feature_name(fixed), "dif__fixed_interval__K_3__d_12");

    FeatureName avg{FeatureFamily::AVG, "daily_avg", {{"d", "5"}}};
    EXPECT_EQ(format_feature_name(avg), "avg__daily_avg__d_5");

    FeatureName gts{FeatureFamily::GTS, "autocorrelation", {{"lag", "2"}}};
    EXPECT_EQ(format_feature_name(gts), "gts__autocorrelation__lag_2");
}

TEST(FeatureName, ParsesBack) {
    const auto intra = parse_feature_name("dif__intra_year__d_13");
    EXPECT_EQ(intra.family, FeatureFamily::DIF);
    EXPECT_EQ(intra.calculator, "intra_year");
    ASSERT_EQ(intra.params.size(), 1u);
    EXPECT_EQ(intra.params[0].first, "d");
    EXPECT_EQ(intra.params[0].second, "13");

    const auto maximum = parse_feature_name("gts__maximum");
    EXPECT_EQ(maximum.family, FeatureFamily::GTS);
    EXPECT_EQ(maximum.calculator, "maximum");
    EXPECT_TRUE(maximum.params.empty());
}

TEST(FeatureName, RejectsMalformed) {
    EXPECT_THROW(parse_feature_name("nonsense"), Error);
    EXPECT_THROW(parse_feature_name("xyz__maximum"), Error);
    EXPECT_THROW(parse_feature_name("gts__"), Error);
    EXPECT_THROW(parse_feature_name("gts__autocorrelation__lag"), Error);
}

TEST(FeatureName, RoundTripsRandomNames) {
    Rng rng(42);
    const char* calculators[] = {"maximum", "fixed_interval", "fft_coefficient", "a_b_c"};
    const char* keys[] = {"K", "d", "lag", "r", "j", "part"};
    const char* values[] = {"1", "12", "0.05", "real", "x9"};
    for (int trial = 0; trial < 500; ++trial) {
        FeatureName name;
        name.family = static_cast<FeatureFamily>(rng.below(3));
        name.calculator = calculators[rng.below(4)];
        const std::size_t n_params = rng.below(4);
        for (std::size_t p = 0; p < n_params; ++p)
            name.params.emplace_back(keys[rng.below(6)], values[rng.below(5)]);
        EXPECT_EQ(parse_feature_name(format_feature_name(name)), name);
    }
}

TEST(ValidateSeries, AcceptsConformingWindow) {
    EXPECT_EQ(validate_customer_series(consecutive_series(24), 24), SeriesVerdict::ok);
}

TEST(ValidateSeries, RejectsGap) {
    auto s = consecutive_series(24);
    // Punch a hole: move one mid reading a month forward.
    s.reading_dates[10] = date_from_month_index(s.reading_dates[10].month_index() + 1, 2);
    EXPECT_EQ(validate_customer_series(s, 24), SeriesVerdict::gap_in_months);
}

TEST(ValidateSeries, RejectsWrongLength) {
    EXPECT_EQ(validate_customer_series(consecutive_series(23), 24), SeriesVerdict::wrong_length);
}

TEST(ValidateSeries, RejectsNonMonotoneDates) {
    auto s = consecutive_series(24);
    std::swap(s.reading_dates[3], s.reading_dates[4]);
    EXPECT_EQ(validate_customer_series(s, 24), SeriesVerdict::non_monotone_dates);
}

TEST(ValidateSeries, VerdictIndependentOfConstructionOrder) {
    // Same content assembled in different orders must judge identically.
    auto forward = consecutive_series(18);
    CustomerSeries backward;
    backward.customer_id = forward.customer_id;
    backward.consumptions.assign(forward.consumptions.rbegin(), forward.consumptions.rend());
    backward.reading_dates.assign(forward.reading_dates.rbegin(), forward.reading_dates.rend());
    std::reverse(backward.consumptions.begin(), backward.consumptions.end());
    std::reverse(backward.reading_dates.begin(), backward.reading_dates.end());
    EXPECT_EQ(backward, forward);
    EXPECT_EQ(validate_customer_series(backward, 18), validate_customer_series(forward, 18));
}

TEST(Date, ParsesAndFormatsIso) {
    const auto d = parse_iso_date("2016-02-29");
    ASSERT_TRUE(d.has_value());
    EXPECT_EQ(d->to_iso(), "2016-02-29");
    EXPECT_FALSE(parse_iso_date("2015-02-29").has_value());
    EXPECT_FALSE(parse_iso_date("??").has_value());
    EXPECT_FALSE(parse_iso_date("2015-13-01").has_value());
    EXPECT_FALSE(parse_iso_date("2015-1-01").has_value());
}

TEST(Date, SerialDayMatchesKnownGaps) {
    EXPECT_EQ((Date{1970, 1, 1}).serial_day(), 0);
    EXPECT_EQ((Date{1970, 1, 31}).serial_day() - (Date{1970, 1, 1}).serial_day(), 30);
    // Leap February.
    EXPECT_EQ((Date{2016, 3, 1}).serial_day() - (Date{2016, 2, 1}).serial_day(), 29);
    EXPECT_EQ((Date{2015, 3, 1}).serial_day() - (Date{2015, 2, 1}).serial_day(), 28);
}

TEST(Date, AddDaysInvertsSerial) {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const Date base{2000 + static_cast<int>(rng.below(30)),
                        1 + static_cast<int>(rng.below(12)), 1 + static_cast<int>(rng.below(28))};
        const int delta = static_cast<int>(rng.uniform_int(-800, 800));
        const Date shifted = add_days(base, delta);
        EXPECT_EQ(shifted.serial_day(), base.serial_day() + delta);
    }
}

TEST(Rng, IsDeterministicAndDerivesDisjointStreams) {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
    EXPECT_NE(derive_seed(1, "x"), derive_seed(1, "y"));
    EXPECT_NE(derive_seed(1, "x", 0), derive_seed(1, "x", 1));
}

TEST(Rng, Uniform01StaysInUnitInterval) {
    Rng rng(99);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform01();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}
