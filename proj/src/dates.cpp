#include "aidx/dates.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "aidx/errors.hpp"

namespace aidx {

namespace {

bool is_leap(int y) {
    return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0);
}

int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                    31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return lengths[static_cast<std::size_t>(m - 1)];
}

}  // namespace

// Civil-calendar <-> serial conversion after Howard Hinnant's algorithms.
long Date::serial() const {
    long y = year;
    if (month <= 2) --y;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const long yoe = y - era * 400;
    const long doy = (153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    const long doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

Date Date::from_serial(long days) {
    long z = days + 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const long doe = z - era * 146097;
    const long yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long y = yoe + era * 400;
    const long doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const long mp = (5 * doy + 2) / 153;
    const long d = doy - (153 * mp + 2) / 5 + 1;
    const long m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
                static_cast<int>(d)};
}

int Date::weekday() const {
    long s = serial();
    // 1970-01-01 was a Thursday (weekday 3).
    return static_cast<int>(((s % 7) + 7 + 3) % 7);
}

std::string Date::str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date Date::parse(std::string_view s) {
    auto fail = [&] { throw DataError("dates", "invalid date '" + std::string(s) + "'"); };
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') fail();
    auto num = [&](std::string_view part) {
        int v = 0;
        auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc() || p != part.data() + part.size()) fail();
        return v;
    };
    Date d{num(s.substr(0, 4)), num(s.substr(5, 2)), num(s.substr(8, 2))};
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month))
        fail();
    return d;
}

}  // namespace aidx
