#pragma once

#include "thermocast/grid.hpp"
#include "thermocast/timeutil.hpp"

namespace thermocast {

// Geometric (unrefracted) solar zenith angle in degrees, NOAA low-precision
// formulas (Spencer Fourier fits for declination and the equation of time
// plus the hour-angle relation). Valid for years 1950-2100; accuracy is a
// few hundredths of a degree against almanac values.
double solar_zenith_deg(double lat_deg, double lon_deg, UnixTime time_utc);

// Per-cell zenith over a grid at one instant.
Grid solar_zenith_grid(const GridSpec& spec, UnixTime time_utc, const std::string& city_id);

}  // namespace thermocast
