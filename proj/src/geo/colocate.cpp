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

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

#include "geoagent/error.hpp"
#include "geoagent/geo/numerics.hpp"

namespace geoagent::geo {

GeoPoint::GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {
  if (!(lat >= -90 && lat <= 90) || !(lon >= -180 && lon <= 180)) {
    throw Error(ErrorCode::InvalidArgument, "point (" + std::to_string(lat) + ", " +
                                                std::to_string(lon) + ") outside the globe");
  }
}

bool BBox::contains(const BBox& o) const {
  return lat_min <= o.lat_min && lat_max >= o.lat_max && lon_min <= o.lon_min &&
         lon_max >= o.lon_max && time_start <= o.time_start && time_end >= o.time_end &&
         depth_min_m <= o.depth_min_m && depth_max_m >= o.depth_max_m;
}

std::size_t MatchupTable::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const MatchupRow& r) { return r.valid; }));
}

double MatchupTable::valid_fraction() const {
  if (rows.empty()) return 0.0;
  return static_cast<double>(valid_count()) / static_cast<double>(rows.size());
}

BBox bounding_box(std::span<const ObsPoint> points) {
  BBox box;
  bool any = false;
  for (const auto& p : points) {
    if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || !std::isfinite(p.depth_m)) continue;
    if (!any) {
      box = BBox{p.lat, p.lat, p.lon, p.lon, p.time, p.time, p.depth_m, p.depth_m};
      any = true;
      continue;
    }
    box.lat_min = std::min(box.lat_min, p.lat);
    box.lat_max = std::max(box.lat_max, p.lat);
    box.lon_min = std::min(box.lon_min, p.lon);
    box.lon_max = std::max(box.lon_max, p.lon);
    box.time_start = std::min(box.time_start, p.time);
    box.time_end = std::max(box.time_end, p.time);
    box.depth_min_m = std::min(box.depth_min_m, p.depth_m);
    box.depth_max_m = std::max(box.depth_max_m, p.depth_m);
  }
  if (!any) throw Error(ErrorCode::EmptyInput, "bounding_box needs at least one valid point");
  return box;
}

BBox expand_bbox(const BBox& box, double pad_deg) {
  if (!(pad_deg >= 0)) throw Error(ErrorCode::InvalidArgument, "pad must be non-negative");
  BBox out = box;
  out.lat_min = std::max(-90.0, box.lat_min - pad_deg);
  out.lat_max = std::min(90.0, box.lat_max + pad_deg);
  out.lon_min = std::max(-180.0, box.lon_min - pad_deg);
  out.lon_max = std::min(180.0, box.lon_max + pad_deg);
  return out;
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  constexpr double kRad = std::numbers::pi / 180.0;
  const double dlat = (b.lat() - a.lat()) * kRad;
  const double dlon = (b.lon() - a.lon()) * kRad;
  const double s1 = std::sin(dlat / 2), s2 = std::sin(dlon / 2);
  double h = s1 * s1 + std::cos(a.lat() * kRad) * std::cos(b.lat() * kRad) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

std::size_t haversine_nearest(const GeoPoint& p, std::span<const GeoPoint> candidates) {
  if (candidates.empty()) throw Error(ErrorCode::EmptyInput, "no candidate points");
  std::size_t best = 0;
  double best_d = haversine_km(p, candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double d = haversine_km(p, candidates[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

namespace {

bool ascending(std::span<const double> axis) { return axis.size() < 2 || axis[1] > axis[0]; }

// First index whose value lies at or beyond `value` in the axis direction.
std::size_t first_not_before(std::span<const double> axis, double value) {
  if (ascending(axis)) {
    return static_cast<std::size_t>(std::lower_bound(axis.begin(), axis.end(), value) -
                                    axis.begin());
  }
  return static_cast<std::size_t>(
      std::lower_bound(axis.begin(), axis.end(), value, std::greater<>()) - axis.begin());
}

struct Bracket {
  std::size_t lo;
  double frac;  // weight of lo + 1
};

// Interval containing `value`, or nullopt outside the hull.
std::optional<Bracket> bracket(std::span<const double> axis, double value) {
  if (!std::isfinite(value)) return std::nullopt;
  if (axis.size() == 1) {
    if (value == axis[0]) return Bracket{0, 0.0};
    return std::nullopt;
  }
  const double first = axis.front(), last = axis.back();
  const double lo_v = std::min(first, last), hi_v = std::max(first, last);
  if (value < lo_v || value > hi_v) return std::nullopt;
  std::size_t i = first_not_before(axis, value);
  if (i == 0) return Bracket{0, 0.0};
  --i;  // axis[i] strictly before value, axis[i + 1] at or beyond it
  const double frac = (value - axis[i]) / (axis[i + 1] - axis[i]);
  return Bracket{i, frac};
}

std::vector<double> time_axis(const Grid4D& grid) {
  std::vector<double> out;
  out.reserve(grid.nt());
  for (auto t : grid.times()) out.push_back(to_epoch_seconds(t));
  return out;
}

}  // namespace

std::size_t nearest_axis_index(std::span<const double> axis, double value) {
  if (axis.empty()) throw Error(ErrorCode::EmptyInput, "empty axis");
  const std::size_t i = first_not_before(axis, value);
  if (i == 0) return 0;
  if (i >= axis.size()) return axis.size() - 1;
  const double before = std::abs(axis[i - 1] - value);
  const double after = std::abs(axis[i] - value);
  return after < before ? i : i - 1;
}

GridIndex nearest_grid_point(const ObsPoint& obs, const Grid4D& grid) {
  const Instant day = floor_day(obs.time);
  const auto& times = grid.times();
  auto it = std::lower_bound(times.begin(), times.end(), day);
  if (it == times.end() || *it != day) {
    throw Error(ErrorCode::DateNotInGrid, format_instant(day) + " is not a grid time step");
  }
  return GridIndex{static_cast<std::size_t>(it - times.begin()),
                   nearest_axis_index(grid.depths(), obs.depth_m),
                   nearest_axis_index(grid.lats(), obs.lat),
                   nearest_axis_index(grid.lons(), obs.lon)};
}

MatchupTable colocate_nearest(std::span<const ObsPoint> obs, const Grid4D& grid) {
  MatchupTable table;
  table.rows.reserve(obs.size());
  for (const auto& o : obs) {
    MatchupRow row{o, kMissing, false};
    try {
      const GridIndex idx = nearest_grid_point(o, grid);
      row.model = grid.at(idx.it, idx.iz, idx.iy, idx.ix);
      row.valid = !is_missing(row.model) && std::isfinite(o.value);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DateNotInGrid) throw;
    }
    table.rows.push_back(row);
  }
  return table;
}

std::vector<double> interp_4d(std::span<const ObsPoint> track, const Grid4D& grid) {
  const std::vector<double> taxis = time_axis(grid);
  std::vector<double> out;
  out.reserve(track.size());
  for (const auto& p : track) {
    const auto bt = bracket(taxis, to_epoch_seconds(p.time));
    const auto bz = bracket(grid.depths(), p.depth_m);
    const auto by = bracket(grid.lats(), p.lat);
    const auto bx = bracket(grid.lons(), p.lon);
    if (!bt || !bz || !by || !bx) {
      out.push_back(kMissing);
      continue;
    }
    double acc = 0.0;
    bool missing = false;
    for (int corner = 0; corner < 16 && !missing; ++corner) {
      const int dt = corner >> 3 & 1, dz = corner >> 2 & 1, dy = corner >> 1 & 1, dx = corner & 1;
      const double w = (dt ? bt->frac : 1 - bt->frac) * (dz ? bz->frac : 1 - bz->frac) *
                       (dy ? by->frac : 1 - by->frac) * (dx ? bx->frac : 1 - bx->frac);
      if (w == 0.0) continue;
      const double v = grid.at(bt->lo + dt, bz->lo + dz, by->lo + dy, bx->lo + dx);
      if (is_missing(v)) {
        missing = true;
      } else {
        acc += w * v;
      }
    }
    out.push_back(missing ? kMissing : acc);
  }
  return out;
}

EdgeRecoveryResult edge_recovery(std::span<const ObsPoint> track, const GridProvider& provider,
                                 double pad_deg) {
  auto count_missing = [](const std::vector<double>& v) {
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), is_missing));
  };
  EdgeRecoveryResult result;
  result.final_box = bounding_box(track);
  result.values = interp_4d(track, provider(result.final_box));
  result.fetches = 1;
  result.first_missing_count = count_missing(result.values);
  result.final_missing_count = result.first_missing_count;
  if (result.first_missing_count == 0) return result;

  result.final_box = expand_bbox(result.final_box, pad_deg);
  result.values = interp_4d(track, provider(result.final_box));
  result.fetches = 2;
  result.final_missing_count = count_missing(result.values);
  if (result.final_missing_count > 0) {
    throw Error(ErrorCode::StillMissing,
                std::to_string(result.final_missing_count) + " of " +
                    std::to_string(track.size()) + " values still missing after expanding by " +
                    std::to_string(pad_deg) + " deg (first pass: " +
                    std::to_string(result.first_missing_count) + ")");
  }
  return result;
}

void write_matchup_csv(std::ostream& out, const MatchupTable& table, char delimiter) {
  const char d = delimiter;
  out << "time" << d << "lat" << d << "lon" << d << "depth_m" << d << "obs" << d << "model" << d
      << "valid\n";
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  auto num = [&](double v) {
    if (is_missing(v)) {
      out << "NA";
    } else {
      out << v;
    }
  };
  for (const auto& row : table.rows) {
    out << format_instant(row.obs.time) << d;
    num(row.obs.lat);
    out << d;
    num(row.obs.lon);
    out << d;
    num(row.obs.depth_m);
    out << d;
    num(row.obs.value);
    out << d;
    num(row.model);
    out << d << (row.valid ? "true" : "false") << '\n';
  }
  out.precision(old_precision);
}

}  // namespace geoagent::geo
