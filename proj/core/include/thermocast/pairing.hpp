#pragma once

#include <optional>
#include <string>
#include <vector>

#include "thermocast/grid.hpp"

namespace thermocast {

// A time-matched (coarse input, fine target) pair, the downscaling
// training unit. The SZA grid is evaluated at the coarse acquisition time.
struct ScenePair {
    Grid coarse;
    Grid sza;
    Grid fine;
    std::string city_id;
    double time_gap_minutes = 0.0;
    double coarse_coverage = 0.0;
    double fine_coverage = 0.0;
    double overlap_fraction = 0.0;
};

enum class PairRejection {
    none,
    no_coarse_in_window,
    fine_coverage,
    coarse_coverage,
    overlap,
};

const char* to_string(PairRejection r);

struct PairThresholds {
    double fine_coverage = 0.5;
    double coarse_coverage = 0.8;
    double overlap = 0.7;
    double max_gap_minutes = 15.0;  // strict upper bound
};

struct PairResult {
    std::optional<ScenePair> pair;
    PairRejection rejection = PairRejection::none;
    bool accepted() const { return pair.has_value(); }
};

// Selects the temporally closest coarse grid (gap strictly below the
// window, earlier acquisition wins ties) and gates the pair on the three
// coverage thresholds, each with >= semantics. The overlap fraction is
// measured relative to the fine grid's valid set. Absence is a value: a
// rejected pairing reports its first failing gate.
PairResult pair_scenes(const Grid& fine, const std::vector<Grid>& coarse_catalog,
                       const PairThresholds& thresholds = {});

}  // namespace thermocast
