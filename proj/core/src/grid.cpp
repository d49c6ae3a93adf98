#include "thermocast/grid.hpp"

#include <algorithm>
#include <cstdint>

#include "thermocast/errors.hpp"

namespace thermocast {

bool GridSpec::operator==(const GridSpec& o) const {
    return lat_origin == o.lat_origin && lon_origin == o.lon_origin && d_lat == o.d_lat &&
           d_lon == o.d_lon && rows == o.rows && cols == o.cols;
}

void GridSpec::validate() const {
    if (rows <= 0 || cols <= 0) {
        throw ConfigError("GridSpec: rows and cols must be positive");
    }
    if (rows > kMaxGridExtent || cols > kMaxGridExtent) {
        throw ConfigError("GridSpec: extent exceeds the " + std::to_string(kMaxGridExtent) +
                          "-cell canvas limit");
    }
    if (std::abs(std::abs(d_lat) - kGridResolutionDeg) > 1e-12 ||
        std::abs(std::abs(d_lon) - kGridResolutionDeg) > 1e-12) {
        throw ConfigError("GridSpec: resolution must be exactly 0.01 degrees");
    }
    if (d_lat >= 0.0 || d_lon <= 0.0) {
        throw ConfigError("GridSpec: rows must run north to south, columns west to east");
    }
}

const char* to_string(GridVariable v) {
    switch (v) {
        case GridVariable::lst_c: return "lst_c";
        case GridVariable::sza_deg: return "sza_deg";
        case GridVariable::valid: return "valid";
    }
    return "?";
}

GridVariable grid_variable_from_string(const std::string& s) {
    if (s == "lst_c") {
        return GridVariable::lst_c;
    }
    if (s == "sza_deg") {
        return GridVariable::sza_deg;
    }
    if (s == "valid") {
        return GridVariable::valid;
    }
    throw ConfigError("unknown grid variable '" + s + "'");
}

Grid Grid::make(const GridSpec& spec, GridVariable variable, UnixTime time_utc,
                std::string city_id, double fill) {
    spec.validate();
    Grid g;
    g.spec = spec;
    g.variable = variable;
    g.time_utc = time_utc;
    g.city_id = std::move(city_id);
    g.values.assign(static_cast<std::size_t>(spec.rows) * spec.cols, fill);
    return g;
}

std::int64_t Grid::valid_count() const {
    std::int64_t n = 0;
    for (const double v : values) {
        n += std::isfinite(v) ? 1 : 0;
    }
    return n;
}

double coverage_fraction(const Grid& grid) {
    if (grid.values.empty()) {
        return 0.0;
    }
    return static_cast<double>(grid.valid_count()) / static_cast<double>(grid.cell_count());
}

namespace {

struct Candidate {
    std::int64_t dist2;
    std::int64_t flat;  // row-major index, the tie-breaker
    bool operator<(const Candidate& o) const {
        return dist2 != o.dist2 ? dist2 < o.dist2 : flat < o.flat;
    }
};

}  // namespace

Grid knn_impute(const Grid& grid, int k) {
    if (k <= 0) {
        throw UsageError("knn_impute: k must be positive");
    }
    const int rows = grid.spec.rows, cols = grid.spec.cols;
    const std::int64_t n_valid = grid.valid_count();
    if (n_valid < k) {
        throw DataError("knn_impute: grid has " + std::to_string(n_valid) +
                        " valid cells, need at least " + std::to_string(k));
    }
    Grid out = grid;
    std::vector<Candidate> best;
    best.reserve(static_cast<std::size_t>(k) + 8);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (grid.is_valid(r, c)) {
                continue;
            }
            best.clear();
            const int max_ring = std::max(std::max(r, rows - 1 - r), std::max(c, cols - 1 - c));
            for (int ring = 0; ring <= max_ring; ++ring) {
                // Once k candidates are held, no cell on a farther ring can
                // beat the current worst: its Euclidean distance is >= ring.
                if (static_cast<int>(best.size()) >= k &&
                    static_cast<std::int64_t>(ring) * ring > best.back().dist2) {
                    break;
                }
                const int r0 = r - ring, r1 = r + ring, c0 = c - ring, c1 = c + ring;
                auto consider = [&](int rr, int cc) {
                    if (rr < 0 || rr >= rows || cc < 0 || cc >= cols || !grid.is_valid(rr, cc)) {
                        return;
                    }
                    const std::int64_t dr = rr - r, dc = cc - c;
                    const Candidate cand{dr * dr + dc * dc,
                                         static_cast<std::int64_t>(rr) * cols + cc};
                    const auto pos = std::lower_bound(best.begin(), best.end(), cand);
                    if (static_cast<int>(best.size()) < k || cand < best.back()) {
                        best.insert(pos, cand);
                        if (static_cast<int>(best.size()) > k) {
                            best.pop_back();
                        }
                    }
                };
                if (ring == 0) {
                    consider(r, c);
                    continue;
                }
                for (int cc = c0; cc <= c1; ++cc) {
                    consider(r0, cc);
                    consider(r1, cc);
                }
                for (int rr = r0 + 1; rr <= r1 - 1; ++rr) {
                    consider(rr, c0);
                    consider(rr, c1);
                }
            }
            double acc = 0.0;
            for (const Candidate& cand : best) {
                acc += grid.values[static_cast<std::size_t>(cand.flat)];
            }
            out.at(r, c) = acc / static_cast<double>(k);
        }
    }
    return out;
}

namespace {

GridSpec canvas_spec(const GridSpec& spec, int canvas_size, int row_offset, int col_offset) {
    GridSpec cs = spec;
    cs.lat_origin = spec.lat_origin - spec.d_lat * row_offset;
    cs.lon_origin = spec.lon_origin - spec.d_lon * col_offset;
    cs.rows = canvas_size;
    cs.cols = canvas_size;
    return cs;
}

}  // namespace

CanvasResult pad_to_canvas(const Grid& grid, const Grid& validity, int canvas_size) {
    if (grid.spec.rows > canvas_size || grid.spec.cols > canvas_size) {
        throw ConfigError("pad_to_canvas: grid " + std::to_string(grid.spec.rows) + "x" +
                          std::to_string(grid.spec.cols) + " exceeds canvas " +
                          std::to_string(canvas_size));
    }
    if (!(validity.spec == grid.spec)) {
        throw ConfigError("pad_to_canvas: validity grid spec does not match");
    }
    const int row_offset = (canvas_size - grid.spec.rows) / 2;
    const int col_offset = (canvas_size - grid.spec.cols) / 2;
    const GridSpec cs = canvas_spec(grid.spec, canvas_size, row_offset, col_offset);

    CanvasResult result;
    result.row_offset = row_offset;
    result.col_offset = col_offset;
    result.canvas = Grid::make(cs, grid.variable, grid.time_utc, grid.city_id, 0.0);
    result.canvas.source = grid.source;
    result.valid_mask = Grid::make(cs, GridVariable::valid, grid.time_utc, grid.city_id, 0.0);
    for (int r = 0; r < grid.spec.rows; ++r) {
        for (int c = 0; c < grid.spec.cols; ++c) {
            result.canvas.at(row_offset + r, col_offset + c) = grid.at(r, c);
            const bool valid = validity.is_valid(r, c) && validity.at(r, c) != 0.0;
            result.valid_mask.at(row_offset + r, col_offset + c) = valid ? 1.0 : 0.0;
        }
    }
    return result;
}

CanvasResult pad_to_canvas(const Grid& grid, int canvas_size) {
    Grid validity = Grid::make(grid.spec, GridVariable::valid, grid.time_utc, grid.city_id, 0.0);
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        validity.values[i] = std::isfinite(grid.values[i]) ? 1.0 : 0.0;
    }
    CanvasResult result = pad_to_canvas(grid, validity, canvas_size);
    // NaN interiors only make sense with explicit validity; here they are
    // masked, and the canvas itself must stay numeric.
    for (double& v : result.canvas.values) {
        if (!std::isfinite(v)) {
            v = 0.0;
        }
    }
    return result;
}

Grid crop_from_canvas(const Grid& canvas, const GridSpec& target_spec) {
    target_spec.validate();
    if (target_spec.rows > canvas.spec.rows || target_spec.cols > canvas.spec.cols) {
        throw ConfigError("crop_from_canvas: target exceeds canvas extent");
    }
    const int row_offset = (canvas.spec.rows - target_spec.rows) / 2;
    const int col_offset = (canvas.spec.cols - target_spec.cols) / 2;
    Grid out = Grid::make(target_spec, canvas.variable, canvas.time_utc, canvas.city_id);
    out.source = canvas.source;
    for (int r = 0; r < target_spec.rows; ++r) {
        for (int c = 0; c < target_spec.cols; ++c) {
            out.at(r, c) = canvas.at(row_offset + r, col_offset + c);
        }
    }
    return out;
}

}  // namespace thermocast
