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

#include "geoagent/geo/grid.hpp"

#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "geoagent/error.hpp"

namespace geoagent::geo {

namespace {

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::InvalidGrid, why); }

void check_axis(const std::vector<double>& axis, const char* name) {
  if (axis.empty()) invalid(std::string(name) + " axis is empty");
  for (double v : axis) {
    if (!std::isfinite(v)) invalid(std::string(name) + " axis has a non-finite value");
  }
  if (axis.size() < 2) return;
  const bool ascending = axis[1] > axis[0];
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (ascending ? !(axis[i] > axis[i - 1]) : !(axis[i] < axis[i - 1])) {
      invalid(std::string(name) + " axis is not strictly monotone");
    }
  }
}

}  // namespace

Grid4D::Grid4D(std::vector<Instant> times, std::vector<double> depths_m, std::vector<double> lats,
               std::vector<double> lons, std::vector<double> values, std::string units)
    : times_(std::move(times)),
      depths_(std::move(depths_m)),
      lats_(std::move(lats)),
      lons_(std::move(lons)),
      values_(std::move(values)),
      units_(std::move(units)) {
  if (times_.empty()) invalid("time axis is empty");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) invalid("time axis is not strictly increasing");
  }
  check_axis(depths_, "depth");
  check_axis(lats_, "lat");
  check_axis(lons_, "lon");
  if (values_.size() != nt() * nz() * ny() * nx()) {
    invalid("value count " + std::to_string(values_.size()) + " does not match axis extents");
  }
}

Grid4D read_grid(std::istream& in) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos && line[0] != '#') return true;
    }
    return false;
  };
  if (!next_line() || line.rfind("grid4d", 0) != 0) {
    throw Error(ErrorCode::ParseError, "grid: missing 'grid4d' header");
  }
  std::string units;
  std::vector<Instant> times;
  std::vector<double> depths, lats, lons;
  bool in_values = false;
  while (!in_values && next_line()) {
    std::istringstream row(line);
    std::string key;
    row >> key;
    if (key == "units") {
      row >> units;
    } else if (key == "time") {
      std::string t;
      while (row >> t) times.push_back(parse_instant(t));
    } else if (key == "depth" || key == "lat" || key == "lon") {
      auto& axis = key == "depth" ? depths : key == "lat" ? lats : lons;
      double v;
      while (row >> v) axis.push_back(v);
    } else if (key == "values") {
      in_values = true;
    } else {
      throw Error(ErrorCode::ParseError, "grid: unknown header '" + key + "'");
    }
  }
  if (!in_values) throw Error(ErrorCode::ParseError, "grid: missing 'values' section");
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    if (token == "NA") {
      values.push_back(kMissing);
    } else {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "grid: bad value '" + token + "'");
      }
    }
  }
  try {
    return Grid4D(std::move(times), std::move(depths), std::move(lats), std::move(lons),
                  std::move(values), std::move(units));
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

void write_grid(std::ostream& out, const Grid4D& grid) {
  out << "grid4d 1\n";
  if (!grid.units().empty()) out << "units " << grid.units() << "\n";
  out << "time";
  for (auto t : grid.times()) out << ' ' << format_instant(t);
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  auto axis = [&](const char* name, const std::vector<double>& values) {
    out << '\n' << name;
    for (double v : values) out << ' ' << v;
  };
  axis("depth", grid.depths());
  axis("lat", grid.lats());
  axis("lon", grid.lons());
  out << "\nvalues\n";
  for (std::size_t row = 0; row < grid.nt() * grid.nz() * grid.ny(); ++row) {
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      const double v = grid.values()[row * grid.nx() + ix];
      if (ix) out << ' ';
      if (is_missing(v)) {
        out << "NA";
      } else {
        out << v;
      }
    }
    out << '\n';
  }
}

}  // namespace geoagent::geo
