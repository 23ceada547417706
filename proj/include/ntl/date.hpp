#pragma once

#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace ntl {

// Calendar date (proleptic Gregorian). Comparable, with exact day arithmetic
// for the daily-average divisor and month arithmetic for consecutiveness.
struct Date {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    auto operator<=>(const Date&) const = default;

    // Months since year 0; consecutive calendar months differ by exactly 1.
    int month_index() const { return year * 12 + (month - 1); }

    // Days since 1970-01-01 (civil-days algorithm).
    std::int64_t serial_day() const {
        int y = year;
        const unsigned m = static_cast<unsigned>(month);
        const unsigned d = static_cast<unsigned>(day);
        y -= m <= 2;
        const int era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
    }

    std::string to_iso() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
        return buf;
    }
};

inline int days_in_month(int year, int month) {
    static constexpr int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2) {
        const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return lengths[month - 1];
}

// Strict ISO YYYY-MM-DD. Returns nullopt on any malformation or impossible date.
inline std::optional<Date> parse_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto digits = [](std::string_view t) -> std::optional<int> {
        int v = 0;
        for (char c : t) {
            if (c < '0' || c > '9') return std::nullopt;
            v = v * 10 + (c - '0');
        }
        return v;
    };
    const auto y = digits(s.substr(0, 4));
    const auto m = digits(s.substr(5, 2));
    const auto d = digits(s.substr(8, 2));
    if (!y || !m || !d) return std::nullopt;
    if (*m < 1 || *m > 12) return std::nullopt;
    if (*d < 1 || *d > days_in_month(*y, *m)) return std::nullopt;
    return Date{*y, *m, *d};
}

// Date for a month index produced by Date::month_index().
inline Date date_from_month_index(int month_index, int day) {
    Date d;
    d.year = month_index / 12;
    d.month = month_index % 12 + 1;
    d.day = day;
    return d;
}

inline Date add_days(const Date& d, int delta) {
    std::int64_t z = d.serial_day() + delta + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned day = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{y + (m <= 2), static_cast<int>(m), static_cast<int>(day)};
}

}  // namespace ntl
