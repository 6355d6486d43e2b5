// Copyright 2026 The GeoAgent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geoagent/geo/grid.hpp"
#include "geoagent/time.hpp"

namespace geoagent::geo {

inline constexpr double kEarthRadiusKm = 6371.0;

class GeoPoint {
 public:
  /// Throws InvalidArgument outside [-90,90] x [-180,180].
  GeoPoint(double lat, double lon);

  double lat() const { return lat_; }
  double lon() const { return lon_; }

 private:
  double lat_;
  double lon_;
};

struct ObsPoint {
  Instant time;
  double lat = 0;
  double lon = 0;
  double depth_m = 0;
  double value = kMissing;
};

struct BBox {
  double lat_min = 0, lat_max = 0;
  double lon_min = 0, lon_max = 0;
  Instant time_start, time_end;
  double depth_min_m = 0, depth_max_m = 0;

  bool contains(const BBox& other) const;

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct GridIndex {
  std::size_t it = 0, iz = 0, iy = 0, ix = 0;

  friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

struct MatchupRow {
  ObsPoint obs;
  double model = kMissing;
  bool valid = false;
};

struct MatchupTable {
  std::vector<MatchupRow> rows;

  std::size_t valid_count() const;
  /// 0 for an empty table.
  double valid_fraction() const;
};

struct ValidationStats {
  std::size_t n = 0;
  double bias = 0;  // mean(model - obs)
  double rmse = 0;
  /// Absent when either side has zero variance.
  std::optional<double> pearson_r;
};

struct DepthBinStats {
  double lo = 0;
  double hi = 0;
  std::size_t n = 0;
  std::optional<ValidationStats> stats;  // absent when n == 0
};

struct InferentialStats {
  double spearman_rho = 0;
  double spearman_p = 1;
  double mann_whitney_u = 0;  // U of the group==true sample
  double mann_whitney_p = 1;
  double welch_t = 0;
  double welch_df = 0;
  double welch_p = 1;
  double ols_slope = 0;
  double ols_intercept = 0;
};

struct WindRoseTable {
  std::array<std::string, 16> sectors;
  std::vector<std::string> categories;
  std::vector<std::vector<long>> counts;  // [sector][category]
  long excluded = 0;

  long total() const;
};

struct EdgeRecoveryResult {
  std::vector<double> values;
  std::size_t first_missing_count = 0;
  std::size_t final_missing_count = 0;
  int fetches = 0;
  BBox final_box;
};

/// Per-axis extremes over points with finite position and depth.
BBox bounding_box(std::span<const ObsPoint> points);

/// Grows lat/lon by `pad_deg` on each side, clamped to the globe without
/// wrapping. Time and depth are unchanged.
BBox expand_bbox(const BBox& box, double pad_deg);

double haversine_km(const GeoPoint& a, const GeoPoint& b);

/// Argmin of haversine distance; ties go to the lowest index.
std::size_t haversine_nearest(const GeoPoint& p, std::span<const GeoPoint> candidates);

/// Index of the closest axis value; ties go to the lower index.
std::size_t nearest_axis_index(std::span<const double> axis, double value);

/// Exact-day time lookup (observation date truncated to 00:00 UTC), then
/// per-axis nearest for depth, lat and lon. Throws DateNotInGrid.
GridIndex nearest_grid_point(const ObsPoint& obs, const Grid4D& grid);

MatchupTable colocate_nearest(std::span<const ObsPoint> obs, const Grid4D& grid);

/// Multilinear interpolation over (time, depth, lat, lon). Queries outside
/// the axis hull, or touching a missing corner with non-zero weight, yield
/// kMissing.
std::vector<double> interp_4d(std::span<const ObsPoint> track, const Grid4D& grid);

using GridProvider = std::function<Grid4D(const BBox&)>;

/// Interpolates against provider(bounding_box(track)); if anything is
/// missing, expands the box once by `pad_deg`, refetches and retries.
/// Throws StillMissing when the second pass still has gaps.
EdgeRecoveryResult edge_recovery(std::span<const ObsPoint> track, const GridProvider& provider,
                                 double pad_deg = 0.3);

/// Throws NoValidRows.
ValidationStats validation_stats(const MatchupTable& matched);
ValidationStats validation_stats(std::span<const double> model, std::span<const double> obs);

/// Half-open bins [lo, hi) except the last, which is closed.
std::vector<DepthBinStats> depth_bin_stats(const MatchupTable& matched,
                                           std::span<const double> bin_edges_m);

/// Shannon-Wiener H' with zero-abundance taxa masked. Throws AllZero.
double shannon_index(std::span<const double> counts);

/// Spearman and OLS on (x, y); Mann-Whitney U and Welch t compare y
/// between group==true and group==false.
InferentialStats inferential_suite(std::span<const double> x, std::span<const double> y,
                                   const std::vector<bool>& group);

/// Average ranks (1-based), ties share the mean rank.
std::vector<double> average_ranks(std::span<const double> values);

double vector_speed(double u, double v);

/// Per-cell mean over time, skipping missing values.
Grid3D time_mean(const Grid4D& grid);

/// log10(x + 1). Throws NegativeInput.
double log10p1(double x);

const std::array<std::string, 16>& compass_sectors();
std::size_t wind_sector(double direction_deg);

/// Default Beaufort edges (m/s) and the matching 12 labels.
const std::vector<double>& beaufort_edges();
const std::vector<std::string>& beaufort_labels();

/// 16-sector x speed-category frequency table. Throws LabelEdgeMismatch
/// unless labels.size() == edges.size() - 1.
WindRoseTable wind_rose(std::span<const double> dirs_deg, std::span<const double> speeds,
                        std::span<const double> edges, const std::vector<std::string>& labels);

/// Delimiter-separated columns: time,lat,lon,depth_m,obs,model,valid.
void write_matchup_csv(std::ostream& out, const MatchupTable& table, char delimiter = ',');

}  // namespace geoagent::geo
