#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

// Calendar arithmetic on epoch seconds (UTC, proleptic Gregorian) and
// ISO-8601 timestamp parsing. No locale, no system time zone.

namespace rteff::timeutil {

/// Days since 1970-01-01 for a civil date.
inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct CivilDate {
    std::int64_t year;
    unsigned month; // 1..12
    unsigned day;   // 1..31
};

/// Civil date from days since 1970-01-01.
inline CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {y + (m <= 2), m, d};
}

/// Epoch seconds of 00:00:00 UTC on the first day of a "YYYY-MM" month.
inline std::optional<std::int64_t> month_label_to_epoch(std::string_view label) {
    if (label.size() != 7 || label[4] != '-') return std::nullopt;
    int y = 0, m = 0;
    auto r1 = std::from_chars(label.data(), label.data() + 4, y);
    auto r2 = std::from_chars(label.data() + 5, label.data() + 7, m);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || m < 1 || m > 12) return std::nullopt;
    return days_from_civil(y, static_cast<unsigned>(m), 1) * 86400;
}

/// "YYYY-MM" month label of an epoch-seconds timestamp (UTC).
inline std::string month_label(double epoch_seconds) {
    const std::int64_t days =
        static_cast<std::int64_t>(std::floor(epoch_seconds / 86400.0));
    const CivilDate cd = civil_from_days(days);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04lld-%02u", static_cast<long long>(cd.year), cd.month);
    return buf;
}

/// "YYYY-MM-DD" day label of an epoch-seconds timestamp (UTC).
inline std::string day_label(double epoch_seconds) {
    const std::int64_t days =
        static_cast<std::int64_t>(std::floor(epoch_seconds / 86400.0));
    const CivilDate cd = civil_from_days(days);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u", static_cast<long long>(cd.year),
                  cd.month, cd.day);
    return buf;
}

namespace detail {
inline bool parse_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    out = 0;
    for (std::size_t i = 0; i < len; ++i) {
        const char c = s[pos + i];
        if (c < '0' || c > '9') return false;
        out = out * 10 + (c - '0');
    }
    return true;
}
} // namespace detail

/// Parse "YYYY-MM-DD[T| ]hh:mm:ss[.frac][Z|±hh[:mm]]" or a plain date to
/// epoch seconds. Returns nullopt when the text is not ISO-8601-like.
inline std::optional<double> parse_iso8601(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    int y, mo, da;
    if (!detail::parse_int(s, 0, 4, y) || s.size() < 10 || s[4] != '-' || s[7] != '-' ||
        !detail::parse_int(s, 5, 2, mo) || !detail::parse_int(s, 8, 2, da))
        return std::nullopt;
    if (mo < 1 || mo > 12 || da < 1 || da > 31) return std::nullopt;
    double sec_of_day = 0.0;
    std::size_t pos = 10;
    if (pos < s.size()) {
        if (s[pos] != 'T' && s[pos] != ' ') return std::nullopt;
        ++pos;
        int hh, mi, ss;
        if (!detail::parse_int(s, pos, 2, hh) || pos + 8 > s.size() || s[pos + 2] != ':' ||
            s[pos + 5] != ':' || !detail::parse_int(s, pos + 3, 2, mi) ||
            !detail::parse_int(s, pos + 6, 2, ss))
            return std::nullopt;
        if (hh > 23 || mi > 59 || ss > 60) return std::nullopt;
        pos += 8;
        double frac = 0.0;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            double scale = 0.1;
            bool any = false;
            while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
                frac += (s[pos] - '0') * scale;
                scale *= 0.1;
                ++pos;
                any = true;
            }
            if (!any) return std::nullopt;
        }
        sec_of_day = hh * 3600.0 + mi * 60.0 + ss + frac;
        if (pos < s.size()) {
            if (s[pos] == 'Z') {
                ++pos;
            } else if (s[pos] == '+' || s[pos] == '-') {
                const int sign = s[pos] == '+' ? 1 : -1;
                ++pos;
                int oh = 0, om = 0;
                if (!detail::parse_int(s, pos, 2, oh)) return std::nullopt;
                pos += 2;
                if (pos < s.size() && s[pos] == ':') ++pos;
                if (pos + 2 <= s.size() && detail::parse_int(s, pos, 2, om)) pos += 2;
                sec_of_day -= sign * (oh * 3600.0 + om * 60.0);
            }
        }
        if (pos != s.size()) return std::nullopt;
    }
    return static_cast<double>(days_from_civil(y, static_cast<unsigned>(mo),
                                               static_cast<unsigned>(da))) *
               86400.0 +
           sec_of_day;
}

} // namespace rteff::timeutil
