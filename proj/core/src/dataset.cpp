#include "thermocast/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "thermocast/errors.hpp"
#include "thermocast/rng.hpp"

namespace thermocast {

std::vector<std::size_t> balance_city_cap_indices(const std::vector<std::string>& city_ids,
                                                  int cap, std::uint64_t seed) {
    if (cap <= 0) {
        throw UsageError("balance_city_cap: cap must be positive");
    }
    std::map<std::string, std::vector<std::size_t>> by_city;
    for (std::size_t i = 0; i < city_ids.size(); ++i) {
        by_city[city_ids[i]].push_back(i);
    }
    const SplitMix64 root(seed);
    std::vector<std::size_t> retained;
    retained.reserve(city_ids.size());
    for (auto& [city, indices] : by_city) {
        if (static_cast<int>(indices.size()) <= cap) {
            retained.insert(retained.end(), indices.begin(), indices.end());
            continue;
        }
        SplitMix64 rng = root.fork("balance:" + city);
        rng.shuffle(indices);
        retained.insert(retained.end(), indices.begin(), indices.begin() + cap);
    }
    std::sort(retained.begin(), retained.end());
    return retained;
}

SplitIndices split_by_year(const std::vector<UnixTime>& times, double val_fraction,
                           std::uint64_t seed, const std::vector<int>& test_years) {
    SplitIndices split;
    std::vector<std::size_t> remainder;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const int year = year_of(times[i]);
        if (std::find(test_years.begin(), test_years.end(), year) != test_years.end()) {
            split.test.push_back(i);
        } else {
            remainder.push_back(i);
        }
    }
    if (remainder.empty()) {
        throw DataError("split_by_year: no samples outside the test years");
    }

    std::vector<std::int64_t> days;
    for (const std::size_t i : remainder) {
        days.push_back(utc_day_index(times[i]));
    }
    std::sort(days.begin(), days.end());
    days.erase(std::unique(days.begin(), days.end()), days.end());

    std::size_t n_val_days = 0;
    if (days.size() > 1) {
        n_val_days = static_cast<std::size_t>(
            std::llround(val_fraction * static_cast<double>(days.size())));
        n_val_days = std::min(n_val_days, days.size() - 1);
        if (val_fraction > 0.0) {
            n_val_days = std::max<std::size_t>(n_val_days, 1);
        }
    }
    SplitMix64 rng = SplitMix64(seed).fork("split_by_year");
    rng.shuffle(days);
    std::unordered_map<std::int64_t, bool> is_val_day;
    for (std::size_t i = 0; i < days.size(); ++i) {
        is_val_day[days[i]] = i < n_val_days;
    }
    for (const std::size_t i : remainder) {
        if (is_val_day[utc_day_index(times[i])]) {
            split.validation.push_back(i);
        } else {
            split.train.push_back(i);
        }
    }
    return split;
}

std::vector<std::array<std::size_t, 4>> build_sequence_indices(
    const std::vector<UnixTime>& frame_times, int lead_minutes) {
    if (std::find(kLeadMinutesAll.begin(), kLeadMinutesAll.end(), lead_minutes) ==
        kLeadMinutesAll.end()) {
        throw UsageError("build_sequences: lead must be one of {15,30,45,60,75} minutes");
    }
    std::unordered_map<UnixTime, std::size_t> by_time;
    by_time.reserve(frame_times.size());
    for (std::size_t i = 0; i < frame_times.size(); ++i) {
        by_time[frame_times[i]] = i;
    }
    const std::int64_t step = kFrameStepMinutes * kSecondsPerMinute;
    const std::int64_t lead = lead_minutes * kSecondsPerMinute;
    std::vector<std::array<std::size_t, 4>> windows;
    for (std::size_t i = 0; i < frame_times.size(); ++i) {
        const UnixTime t = frame_times[i];
        const auto m2 = by_time.find(t - 2 * step);
        const auto m1 = by_time.find(t - step);
        const auto tgt = by_time.find(t + lead);
        if (m2 != by_time.end() && m1 != by_time.end() && tgt != by_time.end()) {
            windows.push_back({m2->second, m1->second, i, tgt->second});
        }
    }
    return windows;
}

std::vector<SequenceSample> build_sequences(const std::vector<Grid>& frames, int lead_minutes) {
    std::vector<UnixTime> times;
    times.reserve(frames.size());
    for (const Grid& f : frames) {
        times.push_back(f.time_utc);
    }
    std::vector<SequenceSample> samples;
    for (const auto& w : build_sequence_indices(times, lead_minutes)) {
        SequenceSample s;
        s.frames = {frames[w[0]], frames[w[1]], frames[w[2]]};
        s.target = frames[w[3]];
        s.lead_minutes = lead_minutes;
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace thermocast
