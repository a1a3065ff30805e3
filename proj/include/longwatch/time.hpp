#ifndef LONGWATCH_TIME_HPP
#define LONGWATCH_TIME_HPP

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace longwatch {

/// UTC instant with millisecond precision.
struct Timestamp {
    std::int64_t millis = 0;  // since 1970-01-01T00:00:00Z

    auto operator<=>(const Timestamp&) const = default;
};

/// Calendar date (UTC), stored as days since 1970-01-01.
struct Date {
    std::int32_t days = 0;

    auto operator<=>(const Date&) const = default;
};

Date make_date(int year, unsigned month, unsigned day);
void civil_from_date(Date d, int& year, unsigned& month, unsigned& day);

/// Accepts "YYYY-MM-DDTHH:MM:SS[.fff]Z" (the trailing Z or "+00:00" is required,
/// fractional seconds optional up to millisecond precision).
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Accepts "YYYY-MM-DD", "YYYY-MM-DDT..." (time part ignored) and "MM/DD/YYYY".
std::optional<Date> parse_date(std::string_view text);

std::string format_timestamp(Timestamp t);  // "2023-11-05T14:30:00.000Z"
std::string format_date(Date d);            // "2023-11-05"

Date date_of(Timestamp t);
Timestamp start_of(Date d);

}  // namespace longwatch

#endif  // LONGWATCH_TIME_HPP
