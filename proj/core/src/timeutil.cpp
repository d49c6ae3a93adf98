#include "thermocast/timeutil.hpp"

#include <cstdio>

#include "thermocast/errors.hpp"

namespace thermocast {

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, int& month, int& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    month = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    year = static_cast<int>(y + (month <= 2));
}

CivilDateTime civil_from_unix(UnixTime t) {
    std::int64_t days = t / kSecondsPerDay;
    std::int64_t rem = t % kSecondsPerDay;
    if (rem < 0) {
        rem += kSecondsPerDay;
        days -= 1;
    }
    CivilDateTime c;
    civil_from_days(days, c.year, c.month, c.day);
    c.hour = static_cast<int>(rem / 3600);
    c.minute = static_cast<int>((rem / 60) % 60);
    c.second = static_cast<int>(rem % 60);
    return c;
}

UnixTime unix_from_civil(const CivilDateTime& c) {
    return days_from_civil(c.year, c.month, c.day) * kSecondsPerDay + c.hour * 3600 +
           c.minute * 60 + c.second;
}

int year_of(UnixTime t) { return civil_from_unix(t).year; }
int month_of(UnixTime t) { return civil_from_unix(t).month; }

int day_of_year(UnixTime t) {
    const CivilDateTime c = civil_from_unix(t);
    return static_cast<int>(days_from_civil(c.year, c.month, c.day) -
                            days_from_civil(c.year, 1, 1)) +
           1;
}

std::int64_t utc_day_index(UnixTime t) {
    std::int64_t days = t / kSecondsPerDay;
    if (t % kSecondsPerDay < 0) {
        days -= 1;
    }
    return days;
}

int local_hour(UnixTime t, int utc_offset_minutes) {
    return civil_from_unix(t + static_cast<std::int64_t>(utc_offset_minutes) * 60).hour;
}

std::string format_iso8601(UnixTime t) {
    const CivilDateTime c = civil_from_unix(t);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", c.year, c.month, c.day,
                  c.hour, c.minute, c.second);
    return buf;
}

std::string format_compact_utc(UnixTime t) {
    const CivilDateTime c = civil_from_unix(t);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d%02d%02dT%02d%02d%02dZ", c.year, c.month, c.day, c.hour,
                  c.minute, c.second);
    return buf;
}

UnixTime parse_iso8601(const std::string& s) {
    CivilDateTime c;
    char zone = '\0';
    const int n = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &c.year, &c.month, &c.day,
                              &c.hour, &c.minute, &c.second, &zone);
    if (n < 6 || (n == 7 && zone != 'Z')) {
        throw ConfigError("invalid ISO-8601 UTC timestamp: '" + s + "'");
    }
    if (c.month < 1 || c.month > 12 || c.day < 1 || c.day > 31 || c.hour > 23 || c.minute > 59 ||
        c.second > 60) {
        throw ConfigError("out-of-range ISO-8601 timestamp: '" + s + "'");
    }
    return unix_from_civil(c);
}

}  // namespace thermocast
