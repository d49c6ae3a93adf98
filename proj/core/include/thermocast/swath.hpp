#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thermocast/grid.hpp"
#include "thermocast/timeutil.hpp"

namespace thermocast {

// QC code points carried by the ingest exchange format.
enum class QualityFlag : std::uint8_t { good = 0, nominal = 1, poor = 2, bad = 3 };
enum class AccuracyFlag : std::uint8_t { excellent = 0, good = 1, fair = 2, poor = 3 };

constexpr std::uint8_t kCloudBitCloud = 1;
constexpr std::uint8_t kCloudBitShadow = 2;
constexpr std::uint8_t kCloudBitCirrus = 4;

constexpr double kMaxViewZenithDeg = 50.0;
constexpr double kLstMinC = 0.0;
constexpr double kLstMaxC = 65.0;

// One fine-sensor acquisition on its native viewing geometry, stored as
// parallel per-pixel arrays. Missing LST is NaN.
struct SwathScene {
    UnixTime time_utc = 0;
    std::string city_id;
    std::string source;
    std::vector<double> lat;
    std::vector<double> lon;
    std::vector<double> lst_c;
    std::vector<std::uint8_t> quality;
    std::vector<std::uint8_t> accuracy;
    std::vector<double> view_zenith_deg;
    std::vector<std::uint8_t> cloud;

    std::size_t size() const { return lat.size(); }
    void validate() const;  // throws ConfigError on inconsistent arrays
};

// Marks pixels missing when they fail quality (not good/nominal), accuracy
// (not excellent/good), viewing angle (>= 50 deg), any cloud/shadow/cirrus
// bit, or the [0, 65] degC range. Everything else passes untouched.
SwathScene qc_filter_fine(const SwathScene& scene);

// Sets cells missing wherever either mask is nonzero. Masks must share the
// grid's spec.
Grid qc_filter_coarse(const Grid& grid, const Grid& cloud_mask, const Grid& water_mask);

// Nearest-valid-neighbor regridding onto the uniform grid: each cell takes
// the valid swath pixel closest to its center (planar distance with the
// longitude axis scaled by cos(lat)) within kRegridSearchRadiusDeg; cells
// with no candidate stay missing.
constexpr double kRegridSearchRadiusDeg = 0.015;
Grid regrid_to_uniform(const SwathScene& scene, const GridSpec& spec);

}  // namespace thermocast
