#include "thermocast/pairing.hpp"

#include <cmath>
#include <cstdlib>

#include "thermocast/errors.hpp"
#include "thermocast/solar.hpp"

namespace thermocast {

const char* to_string(PairRejection r) {
    switch (r) {
        case PairRejection::none: return "none";
        case PairRejection::no_coarse_in_window: return "no_coarse_in_window";
        case PairRejection::fine_coverage: return "fine_coverage";
        case PairRejection::coarse_coverage: return "coarse_coverage";
        case PairRejection::overlap: return "overlap";
    }
    return "?";
}

PairResult pair_scenes(const Grid& fine, const std::vector<Grid>& coarse_catalog,
                       const PairThresholds& thresholds) {
    PairResult result;

    const Grid* best = nullptr;
    std::int64_t best_gap_s = 0;
    for (const Grid& candidate : coarse_catalog) {
        const std::int64_t gap_s = std::llabs(candidate.time_utc - fine.time_utc);
        if (static_cast<double>(gap_s) >= thresholds.max_gap_minutes * 60.0) {
            continue;
        }
        if (best == nullptr || gap_s < best_gap_s ||
            (gap_s == best_gap_s && candidate.time_utc < best->time_utc)) {
            best = &candidate;
            best_gap_s = gap_s;
        }
    }
    if (best == nullptr) {
        result.rejection = PairRejection::no_coarse_in_window;
        return result;
    }
    if (!(best->spec == fine.spec)) {
        throw ConfigError("pair_scenes: fine and coarse grids are on different specs");
    }

    const double fine_cov = coverage_fraction(fine);
    if (fine_cov < thresholds.fine_coverage) {
        result.rejection = PairRejection::fine_coverage;
        return result;
    }
    const double coarse_cov = coverage_fraction(*best);
    if (coarse_cov < thresholds.coarse_coverage) {
        result.rejection = PairRejection::coarse_coverage;
        return result;
    }

    std::int64_t fine_valid = 0;
    std::int64_t joint_valid = 0;
    for (std::size_t i = 0; i < fine.values.size(); ++i) {
        if (std::isfinite(fine.values[i])) {
            ++fine_valid;
            joint_valid += std::isfinite(best->values[i]) ? 1 : 0;
        }
    }
    const double overlap =
        fine_valid > 0 ? static_cast<double>(joint_valid) / static_cast<double>(fine_valid) : 0.0;
    if (overlap < thresholds.overlap) {
        result.rejection = PairRejection::overlap;
        return result;
    }

    ScenePair pair;
    pair.coarse = *best;
    pair.fine = fine;
    pair.sza = solar_zenith_grid(fine.spec, best->time_utc, fine.city_id);
    pair.city_id = fine.city_id;
    pair.time_gap_minutes = static_cast<double>(best_gap_s) / 60.0;
    pair.coarse_coverage = coarse_cov;
    pair.fine_coverage = fine_cov;
    pair.overlap_fraction = overlap;
    result.pair = std::move(pair);
    return result;
}

}  // namespace thermocast
