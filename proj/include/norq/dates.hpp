// dates.hpp -- calendar dates (serial day arithmetic) and fiscal quarters.

#ifndef NORQ_DATES_HPP_
#define NORQ_DATES_HPP_

#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "norq/errors.hpp"

namespace norq {

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// civil_from_days / days_from_civil).
inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

// A calendar date stored as a serial day count. Comparable, hashable.
struct Date {
    std::int64_t serial = 0;  // days since 1970-01-01

    Date() = default;
    Date(int y, int m, int d) : serial(days_from_civil(y, m, d)) {}

    static Date parse(std::string_view s) {
        int y = 0, m = 0, d = 0;
        if (s.size() != 10 || s[4] != '-' || s[7] != '-' ||
            std::from_chars(s.data(), s.data() + 4, y).ec != std::errc{} ||
            std::from_chars(s.data() + 5, s.data() + 7, m).ec != std::errc{} ||
            std::from_chars(s.data() + 8, s.data() + 10, d).ec != std::errc{} ||
            m < 1 || m > 12 || d < 1 || d > 31) {
            throw Error("bad date: " + std::string(s));
        }
        Date out;
        out.serial = days_from_civil(y, m, d);
        return out;
    }

    std::string str() const {
        int y, m, d;
        civil_from_days(serial, y, m, d);
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
        return buf;
    }

    int year() const { int y, m, d; civil_from_days(serial, y, m, d); return y; }
    int month() const { int y, m, d; civil_from_days(serial, y, m, d); return m; }
    // 0 = Sunday ... 6 = Saturday
    int weekday() const { return static_cast<int>(((serial % 7) + 11) % 7); }
    bool is_weekday() const { int w = weekday(); return w >= 1 && w <= 5; }

    Date plus_days(std::int64_t n) const { Date out; out.serial = serial + n; return out; }

    auto operator<=>(const Date&) const = default;
};

inline std::int64_t operator-(Date a, Date b) { return a.serial - b.serial; }

// A calendar quarter such as 2020Q3, ordered by index = year*4 + (q-1).
struct Quarter {
    int index = 0;

    Quarter() = default;
    Quarter(int year, int q) : index(year * 4 + (q - 1)) {}

    static Quarter parse(std::string_view s) {
        // accepts 2020Q3 / 2020q3
        std::size_t qa = s.find('Q');
        if (qa == std::string_view::npos) qa = s.find('q');
        int year = 0, q = 0;
        if (qa == std::string_view::npos ||
            std::from_chars(s.data(), s.data() + qa, year).ec != std::errc{} ||
            std::from_chars(s.data() + qa + 1, s.data() + s.size(), q).ec != std::errc{} ||
            q < 1 || q > 4) {
            throw Error("bad quarter: " + std::string(s));
        }
        return Quarter(year, q);
    }

    int year() const { return index >= 0 ? index / 4 : (index - 3) / 4; }
    int q() const { return index - year() * 4 + 1; }

    std::string str() const {
        return std::to_string(year()) + "Q" + std::to_string(q());
    }

    Quarter prev() const { Quarter p; p.index = index - 1; return p; }
    Quarter next() const { Quarter n; n.index = index + 1; return n; }

    // Last calendar day of the quarter.
    Date end_date() const {
        static constexpr int last_day[4] = {31, 30, 30, 31};
        static constexpr int last_month[4] = {3, 6, 9, 12};
        return Date(year(), last_month[q() - 1], last_day[q() - 1]);
    }

    auto operator<=>(const Quarter&) const = default;
};

}  // namespace norq

#endif  // NORQ_DATES_HPP_
