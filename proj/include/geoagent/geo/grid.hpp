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

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "geoagent/time.hpp"

namespace geoagent::geo {

/// Missing values are quiet NaN in memory and "NA" in text.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

/// Rectilinear time x depth x lat x lon field, row-major in that order.
/// Spatial axes may ascend or descend but must be strictly monotone; time
/// must strictly increase. Immutable after construction.
class Grid4D {
 public:
  Grid4D(std::vector<Instant> times, std::vector<double> depths_m, std::vector<double> lats,
         std::vector<double> lons, std::vector<double> values, std::string units = {});

  const std::vector<Instant>& times() const { return times_; }
  const std::vector<double>& depths() const { return depths_; }
  const std::vector<double>& lats() const { return lats_; }
  const std::vector<double>& lons() const { return lons_; }
  const std::vector<double>& values() const { return values_; }
  const std::string& units() const { return units_; }

  std::size_t nt() const { return times_.size(); }
  std::size_t nz() const { return depths_.size(); }
  std::size_t ny() const { return lats_.size(); }
  std::size_t nx() const { return lons_.size(); }

  std::size_t offset(std::size_t it, std::size_t iz, std::size_t iy, std::size_t ix) const {
    return ((it * nz() + iz) * ny() + iy) * nx() + ix;
  }
  double at(std::size_t it, std::size_t iz, std::size_t iy, std::size_t ix) const {
    return values_[offset(it, iz, iy, ix)];
  }

 private:
  std::vector<Instant> times_;
  std::vector<double> depths_, lats_, lons_;
  std::vector<double> values_;
  std::string units_;
};

/// depth x lat x lon field, e.g. a temporal mean.
struct Grid3D {
  std::vector<double> depths_m, lats, lons;
  std::vector<double> values;
  std::string units;

  double at(std::size_t iz, std::size_t iy, std::size_t ix) const {
    return values[(iz * lats.size() + iy) * lons.size() + ix];
  }
};

/// Text fixture format:
///
///   grid4d 1
///   units <tag>            (optional)
///   time <iso> <iso> ...
///   depth <m> ...
///   lat <deg> ...
///   lon <deg> ...
///   values
///   <nx numbers per line, one line per (time, depth, lat) in row-major order>
///
/// Missing values are written "NA".
Grid4D read_grid(std::istream& in);
void write_grid(std::ostream& out, const Grid4D& grid);

}  // namespace geoagent::geo
