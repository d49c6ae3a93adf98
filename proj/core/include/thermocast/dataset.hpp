#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "thermocast/grid.hpp"
#include "thermocast/timeutil.hpp"

namespace thermocast {

constexpr int kSequenceLength = 3;
constexpr int kFrameStepMinutes = 15;
inline const std::vector<int> kLeadMinutesAll = {15, 30, 45, 60, 75};

// Three consecutive frames plus a lead-time target, the nowcasting
// training unit.
struct SequenceSample {
    std::array<Grid, kSequenceLength> frames;  // t-30, t-15, t
    Grid target;                               // t + lead
    int lead_minutes = 15;
};

struct DatasetSplit {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
};

inline const std::vector<int> kTestYears = {2007, 2013, 2019, 2025};

// Per city: retains everything when the count is within the cap, otherwise
// a uniform random subset of exactly `cap` items, deterministic from the
// seed and independent of input order beyond the per-city grouping.
// Returned indices are ascending.
std::vector<std::size_t> balance_city_cap_indices(const std::vector<std::string>& city_ids,
                                                  int cap, std::uint64_t seed);

// Samples dated in a test year go to test; the remainder is split by UTC
// calendar day, validation receiving val_fraction of the distinct days
// (deterministic from the seed).
SplitIndices split_by_year(const std::vector<UnixTime>& times, double val_fraction,
                           std::uint64_t seed, const std::vector<int>& test_years = kTestYears);

// Window positions (t-30, t-15, t, t+lead) over a time-sorted frame list;
// every frame of a window must exist, so gaps simply suppress the windows
// that touch them.
std::vector<std::array<std::size_t, 4>> build_sequence_indices(
    const std::vector<UnixTime>& frame_times, int lead_minutes);

std::vector<SequenceSample> build_sequences(const std::vector<Grid>& frames, int lead_minutes);

}  // namespace thermocast
