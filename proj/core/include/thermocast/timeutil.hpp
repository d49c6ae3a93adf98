#pragma once

#include <cstdint>
#include <string>

namespace thermocast {

// Seconds since the Unix epoch, UTC. All pipeline timestamps use this.
using UnixTime = std::int64_t;

constexpr std::int64_t kSecondsPerMinute = 60;
constexpr std::int64_t kSecondsPerDay = 86400;
constexpr int kFrameCadenceMinutes = 15;

struct CivilDateTime {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
    int hour = 0;
    int minute = 0;
    int second = 0;
};

// Proleptic Gregorian calendar conversions (Hinnant's algorithms).
std::int64_t days_from_civil(int year, int month, int day);
void civil_from_days(std::int64_t days, int& year, int& month, int& day);

CivilDateTime civil_from_unix(UnixTime t);
UnixTime unix_from_civil(const CivilDateTime& c);

int year_of(UnixTime t);
int month_of(UnixTime t);
int day_of_year(UnixTime t);  // 1..366

// Calendar day index (days since epoch) of the UTC day containing t.
std::int64_t utc_day_index(UnixTime t);

// Civil local hour 0..23 for a fixed UTC offset (no DST database; city
// offsets are configured as their warm-season value).
int local_hour(UnixTime t, int utc_offset_minutes);

// "YYYY-MM-DDThh:mm:ssZ"
std::string format_iso8601(UnixTime t);
UnixTime parse_iso8601(const std::string& s);  // throws ConfigError

// Filesystem-safe compact form "YYYYMMDDThhmmssZ".
std::string format_compact_utc(UnixTime t);

}  // namespace thermocast
