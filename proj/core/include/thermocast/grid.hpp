#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "thermocast/timeutil.hpp"

namespace thermocast {

constexpr double kGridResolutionDeg = 0.01;
constexpr int kMaxGridExtent = 128;
constexpr int kCanvasSize = 128;

inline double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }

// Uniform 0.01-degree lat/lon raster. lat_origin/lon_origin are the north
// and west edges; rows run north to south (d_lat = -0.01), columns west to
// east (d_lon = +0.01).
struct GridSpec {
    double lat_origin = 0.0;
    double lon_origin = 0.0;
    double d_lat = -kGridResolutionDeg;
    double d_lon = kGridResolutionDeg;
    int rows = 0;
    int cols = 0;

    double cell_lat(int r) const { return lat_origin + d_lat * (r + 0.5); }
    double cell_lon(int c) const { return lon_origin + d_lon * (c + 0.5); }
    double center_lat() const { return lat_origin + d_lat * rows * 0.5; }
    double center_lon() const { return lon_origin + d_lon * cols * 0.5; }

    bool operator==(const GridSpec& o) const;
    void validate() const;  // throws ConfigError
};

enum class GridVariable { lst_c, sza_deg, valid };

const char* to_string(GridVariable v);
GridVariable grid_variable_from_string(const std::string& s);  // throws ConfigError

struct Grid {
    GridSpec spec;
    GridVariable variable = GridVariable::lst_c;
    UnixTime time_utc = 0;
    std::string city_id;
    std::string source;
    std::vector<double> values;  // rows*cols, NaN marks missing

    static Grid make(const GridSpec& spec, GridVariable variable, UnixTime time_utc,
                     std::string city_id, double fill = missing_value());

    double& at(int r, int c) { return values[static_cast<std::size_t>(r) * spec.cols + c]; }
    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * spec.cols + c]; }
    bool is_valid(int r, int c) const { return std::isfinite(at(r, c)); }
    std::int64_t cell_count() const { return static_cast<std::int64_t>(spec.rows) * spec.cols; }
    std::int64_t valid_count() const;
};

// Fraction of non-missing cells, counted before any canvas padding.
double coverage_fraction(const Grid& grid);

// Fills every missing cell with the unweighted mean of its k nearest valid
// cells (Euclidean distance in row/col index space, ties broken in
// row-major order). Valid cells pass through unchanged.
Grid knn_impute(const Grid& grid, int k = 5);

struct CanvasResult {
    Grid canvas;      // canvas_size x canvas_size, padding cells hold 0
    Grid valid_mask;  // 1 where the source cell was valid, 0 elsewhere
    int row_offset = 0;
    int col_offset = 0;
};

// Centers the grid on a square canvas. Padding cells take the value 0 (the
// caller pads normalized fields) and mask 0; interior mask reflects the
// validity grid. The two-argument form derives validity from the grid's
// own NaN pattern; the three-argument form takes the pre-imputation
// validity explicitly.
CanvasResult pad_to_canvas(const Grid& grid, int canvas_size = kCanvasSize);
CanvasResult pad_to_canvas(const Grid& grid, const Grid& validity, int canvas_size = kCanvasSize);

// Inverse of the centering: extracts the rows x cols window at the given
// offsets.
Grid crop_from_canvas(const Grid& canvas, const GridSpec& target_spec);

}  // namespace thermocast
