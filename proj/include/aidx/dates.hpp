#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace aidx {

/// Calendar date. Comparison is chronological (field order makes the
/// defaulted lexicographic compare correct).
struct Date {
    int year = 0;
    int month = 0;   // 1..12
    int day = 0;     // 1..31

    auto operator<=>(const Date&) const = default;

    /// Days since 1970-01-01 (negative before the epoch).
    long serial() const;

    /// 0 = Monday .. 6 = Sunday.
    int weekday() const;

    /// ISO-8601 "YYYY-MM-DD".
    std::string str() const;

    /// Parses strict ISO-8601 "YYYY-MM-DD" and validates the calendar day.
    static Date parse(std::string_view s);

    static Date from_serial(long days);
};

}  // namespace aidx
