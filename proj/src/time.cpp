#include "longwatch/time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace longwatch {

namespace {

constexpr std::int64_t kMillisPerDay = 86'400'000;

bool read_uint(std::string_view s, std::size_t pos, std::size_t width, unsigned& out) {
    if (pos + width > s.size()) return false;
    for (std::size_t i = pos; i < pos + width; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    auto res = std::from_chars(s.data() + pos, s.data() + pos + width, out);
    return res.ec == std::errc{};
}

std::optional<Date> checked_date(unsigned y, unsigned m, unsigned d) {
    using namespace std::chrono;
    year_month_day ymd{year{static_cast<int>(y)}, month{m}, day{d}};
    if (!ymd.ok()) return std::nullopt;
    return Date{static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count())};
}

}  // namespace

Date make_date(int y, unsigned m, unsigned d) {
    using namespace std::chrono;
    year_month_day ymd{year{y}, month{m}, day{d}};
    return Date{static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count())};
}

void civil_from_date(Date d, int& y, unsigned& m, unsigned& day) {
    using namespace std::chrono;
    year_month_day ymd{sys_days{days{d.days}}};
    y = static_cast<int>(ymd.year());
    m = static_cast<unsigned>(ymd.month());
    day = static_cast<unsigned>(ymd.day());
}

std::optional<Timestamp> parse_timestamp(std::string_view s) {
    // YYYY-MM-DDTHH:MM:SS
    unsigned y, mo, d, h, mi, sec;
    if (s.size() < 20) return std::nullopt;
    if (!read_uint(s, 0, 4, y) || s[4] != '-' || !read_uint(s, 5, 2, mo) || s[7] != '-' ||
        !read_uint(s, 8, 2, d) || (s[10] != 'T' && s[10] != ' ') || !read_uint(s, 11, 2, h) ||
        s[13] != ':' || !read_uint(s, 14, 2, mi) || s[16] != ':' || !read_uint(s, 17, 2, sec)) {
        return std::nullopt;
    }
    if (h > 23 || mi > 59 || sec > 59) return std::nullopt;
    auto date = checked_date(y, mo, d);
    if (!date) return std::nullopt;

    std::size_t pos = 19;
    unsigned millis = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        std::size_t digits = 0;
        unsigned scale = 100;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            if (digits >= 3) return std::nullopt;  // sub-millisecond precision not representable
            millis += static_cast<unsigned>(s[pos] - '0') * scale;
            scale /= 10;
            ++digits;
            ++pos;
        }
        if (digits == 0) return std::nullopt;
    }
    std::string_view zone = s.substr(pos);
    if (zone != "Z" && zone != "+00:00") return std::nullopt;

    std::int64_t ms = static_cast<std::int64_t>(date->days) * kMillisPerDay +
                      (static_cast<std::int64_t>(h) * 3600 + mi * 60 + sec) * 1000 + millis;
    return Timestamp{ms};
}

std::optional<Date> parse_date(std::string_view s) {
    unsigned y, m, d;
    if (s.size() >= 10 && s[4] == '-' && s[7] == '-') {
        if (!read_uint(s, 0, 4, y) || !read_uint(s, 5, 2, m) || !read_uint(s, 8, 2, d)) {
            return std::nullopt;
        }
        if (s.size() > 10 && s[10] != 'T' && s[10] != ' ') return std::nullopt;
        return checked_date(y, m, d);
    }
    if (s.size() >= 10 && s[2] == '/' && s[5] == '/') {
        if (!read_uint(s, 0, 2, m) || !read_uint(s, 3, 2, d) || !read_uint(s, 6, 4, y)) {
            return std::nullopt;
        }
        if (s.size() > 10 && s[10] != ' ') return std::nullopt;
        return checked_date(y, m, d);
    }
    return std::nullopt;
}

Date date_of(Timestamp t) {
    std::int64_t days = t.millis / kMillisPerDay;
    if (t.millis % kMillisPerDay < 0) --days;
    return Date{static_cast<std::int32_t>(days)};
}

Timestamp start_of(Date d) { return Timestamp{static_cast<std::int64_t>(d.days) * kMillisPerDay}; }

std::string format_timestamp(Timestamp t) {
    Date d = date_of(t);
    std::int64_t in_day = t.millis - static_cast<std::int64_t>(d.days) * kMillisPerDay;
    int y;
    unsigned m, day;
    civil_from_date(d, y, m, day);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", y, m, day,
                  static_cast<int>(in_day / 3'600'000), static_cast<int>(in_day / 60'000 % 60),
                  static_cast<int>(in_day / 1000 % 60), static_cast<int>(in_day % 1000));
    return buf;
}

std::string format_date(Date d) {
    int y;
    unsigned m, day;
    civil_from_date(d, y, m, day);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, day);
    return buf;
}

}  // namespace longwatch
