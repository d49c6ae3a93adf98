#include "thermocast/solar.hpp"

#include <cmath>

#include "thermocast/errors.hpp"

namespace thermocast {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

struct SolarTerms {
    double declination_rad;
    double eqtime_minutes;
};

SolarTerms solar_terms(UnixTime t) {
    const CivilDateTime c = civil_from_unix(t);
    const double hour = c.hour + c.minute / 60.0 + c.second / 3600.0;
    // Fractional year over a 365-day cycle (Spencer 1971 convention).
    const double gamma =
        2.0 * M_PI / 365.0 * (day_of_year(t) - 1 + (hour - 12.0) / 24.0);
    const double eqtime =
        229.18 * (0.000075 + 0.001868 * std::cos(gamma) - 0.032077 * std::sin(gamma) -
                  0.014615 * std::cos(2.0 * gamma) - 0.040849 * std::sin(2.0 * gamma));
    const double decl = 0.006918 - 0.399912 * std::cos(gamma) + 0.070257 * std::sin(gamma) -
                        0.006758 * std::cos(2.0 * gamma) + 0.000907 * std::sin(2.0 * gamma) -
                        0.002697 * std::cos(3.0 * gamma) + 0.00148 * std::sin(3.0 * gamma);
    return {decl, eqtime};
}

}  // namespace

double solar_zenith_deg(double lat_deg, double lon_deg, UnixTime time_utc) {
    const int year = year_of(time_utc);
    if (year < 1950 || year > 2100) {
        throw UsageError("solar_zenith_deg: time outside the supported 1950-2100 range");
    }
    const SolarTerms terms = solar_terms(time_utc);
    const CivilDateTime c = civil_from_unix(time_utc);
    const double minutes_utc = c.hour * 60.0 + c.minute + c.second / 60.0;
    // True solar time in minutes; 4 minutes per degree of longitude east.
    const double tst = minutes_utc + terms.eqtime_minutes + 4.0 * lon_deg;
    const double hour_angle_rad = (tst / 4.0 - 180.0) * kDegToRad;
    const double lat = lat_deg * kDegToRad;
    double cos_zenith = std::sin(lat) * std::sin(terms.declination_rad) +
                        std::cos(lat) * std::cos(terms.declination_rad) *
                            std::cos(hour_angle_rad);
    cos_zenith = std::min(1.0, std::max(-1.0, cos_zenith));
    return std::acos(cos_zenith) / kDegToRad;
}

Grid solar_zenith_grid(const GridSpec& spec, UnixTime time_utc, const std::string& city_id) {
    Grid g = Grid::make(spec, GridVariable::sza_deg, time_utc, city_id);
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            g.at(r, c) = solar_zenith_deg(spec.cell_lat(r), spec.cell_lon(c), time_utc);
        }
    }
    return g;
}

}  // namespace thermocast
