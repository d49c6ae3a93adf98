#include "thermocast/swath.hpp"

#include <cmath>
#include <unordered_map>

#include "thermocast/errors.hpp"

namespace thermocast {

void SwathScene::validate() const {
    const std::size_t n = lat.size();
    if (lon.size() != n || lst_c.size() != n || quality.size() != n || accuracy.size() != n ||
        view_zenith_deg.size() != n || cloud.size() != n) {
        throw ConfigError("SwathScene: per-pixel arrays have inconsistent lengths");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (lat[i] < -90.0 || lat[i] > 90.0 || lon[i] < -180.0 || lon[i] > 180.0) {
            throw ConfigError("SwathScene: pixel coordinates out of range");
        }
    }
}

SwathScene qc_filter_fine(const SwathScene& scene) {
    SwathScene out = scene;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const bool quality_ok = out.quality[i] <= static_cast<std::uint8_t>(QualityFlag::nominal);
        const bool accuracy_ok = out.accuracy[i] <= static_cast<std::uint8_t>(AccuracyFlag::good);
        const bool angle_ok = out.view_zenith_deg[i] < kMaxViewZenithDeg;
        const bool clear = out.cloud[i] == 0;
        const double v = out.lst_c[i];
        const bool range_ok = std::isfinite(v) && v >= kLstMinC && v <= kLstMaxC;
        if (!(quality_ok && accuracy_ok && angle_ok && clear && range_ok)) {
            out.lst_c[i] = missing_value();
        }
    }
    return out;
}

Grid qc_filter_coarse(const Grid& grid, const Grid& cloud_mask, const Grid& water_mask) {
    if (!(cloud_mask.spec == grid.spec) || !(water_mask.spec == grid.spec)) {
        throw ConfigError("qc_filter_coarse: mask grid spec does not match scene spec");
    }
    Grid out = grid;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const bool cloudy = std::isfinite(cloud_mask.values[i]) && cloud_mask.values[i] != 0.0;
        const bool water = std::isfinite(water_mask.values[i]) && water_mask.values[i] != 0.0;
        if (cloudy || water) {
            out.values[i] = missing_value();
        }
    }
    return out;
}

Grid regrid_to_uniform(const SwathScene& scene, const GridSpec& spec) {
    scene.validate();
    spec.validate();
    Grid out = Grid::make(spec, GridVariable::lst_c, scene.time_utc, scene.city_id);
    out.source = scene.source;

    // Bin valid pixels by the cell they fall in; the 0.015-degree search
    // radius is covered by the 5x5 bin neighborhood of each cell.
    std::unordered_map<std::int64_t, std::vector<std::size_t>> bins;
    for (std::size_t i = 0; i < scene.size(); ++i) {
        if (!std::isfinite(scene.lst_c[i])) {
            continue;
        }
        const auto r = static_cast<std::int64_t>(
            std::floor((scene.lat[i] - spec.lat_origin) / spec.d_lat));
        const auto c = static_cast<std::int64_t>(
            std::floor((scene.lon[i] - spec.lon_origin) / spec.d_lon));
        if (r < -2 || r > spec.rows + 1 || c < -2 || c > spec.cols + 1) {
            continue;  // cannot reach any cell within the search radius
        }
        bins[r * 4096 + c].push_back(i);
    }
    if (bins.empty()) {
        return out;  // empty or fully-invalid scene: all-missing grid
    }

    const double radius2 = kRegridSearchRadiusDeg * kRegridSearchRadiusDeg;
    for (int r = 0; r < spec.rows; ++r) {
        const double clat = spec.cell_lat(r);
        const double lon_scale = std::cos(clat * M_PI / 180.0);
        for (int c = 0; c < spec.cols; ++c) {
            const double clon = spec.cell_lon(c);
            double best_d2 = radius2;
            std::size_t best_idx = 0;
            bool found = false;
            for (std::int64_t rr = r - 2; rr <= r + 2; ++rr) {
                for (std::int64_t cc = c - 2; cc <= c + 2; ++cc) {
                    const auto it = bins.find(rr * 4096 + cc);
                    if (it == bins.end()) {
                        continue;
                    }
                    for (const std::size_t i : it->second) {
                        const double dlat = scene.lat[i] - clat;
                        const double dlon = (scene.lon[i] - clon) * lon_scale;
                        const double d2 = dlat * dlat + dlon * dlon;
                        // Strict < keeps the earliest pixel on exact ties.
                        if (d2 <= radius2 && (!found || d2 < best_d2 ||
                                              (d2 == best_d2 && i < best_idx))) {
                            best_d2 = d2;
                            best_idx = i;
                            found = true;
                        }
                    }
                }
            }
            if (found) {
                out.at(r, c) = scene.lst_c[best_idx];
            }
        }
    }
    return out;
}

}  // namespace thermocast
