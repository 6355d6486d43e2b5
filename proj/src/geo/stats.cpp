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
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>

#include "geoagent/error.hpp"
#include "geoagent/geo/numerics.hpp"

namespace geoagent::geo {

namespace {

ValidationStats stats_from_pairs(const std::vector<double>& model, const std::vector<double>& obs) {
  const std::size_t n = model.size();
  ValidationStats s;
  s.n = n;
  double mean_m = 0, mean_o = 0, sum_d = 0, sum_d2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = model[i] - obs[i];
    sum_d += d;
    sum_d2 += d * d;
    mean_m += model[i];
    mean_o += obs[i];
  }
  const double dn = static_cast<double>(n);
  s.bias = sum_d / dn;
  s.rmse = std::sqrt(sum_d2 / dn);
  mean_m /= dn;
  mean_o /= dn;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = model[i] - mean_m, b = obs[i] - mean_o;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx > 0 && syy > 0) s.pearson_r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return s;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double ma = mean_of(a), mb = mean_of(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

bool constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

double two_sided_t(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  boost::math::students_t dist(df);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
}

// z is signed: a continuity-corrected statistic below the mean clips to 1.
double two_sided_upper_normal(double z) {
  boost::math::normal dist;
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, z)), 0.0, 1.0);
}

double sample_variance(const std::vector<double>& v, double mean) {
  double acc = 0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(v.size() - 1);
}

}  // namespace

ValidationStats validation_stats(const MatchupTable& matched) {
  std::vector<double> model, obs;
  for (const auto& row : matched.rows) {
    if (!row.valid || is_missing(row.model) || !std::isfinite(row.obs.value)) continue;
    model.push_back(row.model);
    obs.push_back(row.obs.value);
  }
  if (model.empty()) throw Error(ErrorCode::NoValidRows, "matchup table has no valid rows");
  return stats_from_pairs(model, obs);
}

ValidationStats validation_stats(std::span<const double> model, std::span<const double> obs) {
  if (model.size() != obs.size()) {
    throw Error(ErrorCode::InvalidArgument, "model and obs lengths differ");
  }
  std::vector<double> m, o;
  for (std::size_t i = 0; i < model.size(); ++i) {
    if (!std::isfinite(model[i]) || !std::isfinite(obs[i])) continue;
    m.push_back(model[i]);
    o.push_back(obs[i]);
  }
  if (m.empty()) throw Error(ErrorCode::NoValidRows, "no finite model/obs pairs");
  return stats_from_pairs(m, o);
}

std::vector<DepthBinStats> depth_bin_stats(const MatchupTable& matched,
                                           std::span<const double> bin_edges_m) {
  if (bin_edges_m.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two edges");
  for (std::size_t i = 1; i < bin_edges_m.size(); ++i) {
    if (!(bin_edges_m[i] > bin_edges_m[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "bin edges must strictly increase");
    }
  }
  const std::size_t bins = bin_edges_m.size() - 1;
  std::vector<std::vector<double>> model(bins), obs(bins);
  for (const auto& row : matched.rows) {
    if (!row.valid || is_missing(row.model) || !std::isfinite(row.obs.value)) continue;
    const double z = row.obs.depth_m;
    if (!(z >= bin_edges_m.front() && z <= bin_edges_m.back())) continue;
    auto it = std::upper_bound(bin_edges_m.begin(), bin_edges_m.end(), z);
    std::size_t b = static_cast<std::size_t>(it - bin_edges_m.begin()) - 1;
    if (b >= bins) b = bins - 1;
    model[b].push_back(row.model);
    obs[b].push_back(row.obs.value);
  }
  std::vector<DepthBinStats> out;
  out.reserve(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    DepthBinStats s{bin_edges_m[b], bin_edges_m[b + 1], model[b].size(), std::nullopt};
    if (s.n > 0) s.stats = stats_from_pairs(model[b], obs[b]);
    out.push_back(s);
  }
  return out;
}

double shannon_index(std::span<const double> counts) {
  double total = 0;
  for (double c : counts) {
    if (!(c >= 0) || !std::isfinite(c)) {
      throw Error(ErrorCode::NegativeInput, "abundances must be finite and non-negative");
    }
    total += c;
  }
  if (!(total > 0)) throw Error(ErrorCode::AllZero, "all abundances are zero");
  double h = 0;
  for (double c : counts) {
    if (c <= 0) continue;
    const double p = c / total;
    h -= p * std::log(p);
  }
  return std::max(0.0, h);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

InferentialStats inferential_suite(std::span<const double> x, std::span<const double> y,
                                   const std::vector<bool>& group) {
  if (x.size() != y.size() || group.size() != y.size()) {
    throw Error(ErrorCode::InvalidArgument, "x, y and group lengths differ");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw Error(ErrorCode::InvalidArgument, "non-finite input at row " + std::to_string(i));
    }
  }
  const std::size_t n = x.size();
  if (n < 3) throw Error(ErrorCode::DegenerateInput, "need at least 3 pairs");
  if (constant(x) || constant(y)) {
    throw Error(ErrorCode::DegenerateInput, "constant series has no correlation");
  }
  InferentialStats s;
  const double dn = static_cast<double>(n);

  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  s.spearman_rho = pearson(rx, ry);
  if (std::abs(s.spearman_rho) >= 1.0) {
    s.spearman_p = 0.0;
  } else {
    const double t =
        s.spearman_rho * std::sqrt((dn - 2.0) / (1.0 - s.spearman_rho * s.spearman_rho));
    s.spearman_p = two_sided_t(t, dn - 2.0);
  }

  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  s.ols_slope = sxy / sxx;
  s.ols_intercept = my - s.ols_slope * mx;

  std::vector<double> a, b;
  for (std::size_t i = 0; i < n; ++i) (group[i] ? a : b).push_back(y[i]);
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::DegenerateInput, "each group needs at least 2 members (got " +
                                                std::to_string(a.size()) + " and " +
                                                std::to_string(b.size()) + ")");
  }
  const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());

  // Mann-Whitney on the pooled ranks of y.
  double rank_sum_a = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (group[i]) rank_sum_a += ry[i];
  }
  s.mann_whitney_u = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
  std::vector<double> sorted_y(y.begin(), y.end());
  std::sort(sorted_y.begin(), sorted_y.end());
  double tie_term = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted_y[j] == sorted_y[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double mu = n1 * n2 / 2.0;
  const double sigma = std::sqrt(n1 * n2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0))));
  const double u_big = std::max(s.mann_whitney_u, n1 * n2 - s.mann_whitney_u);
  s.mann_whitney_p = sigma > 0 ? two_sided_upper_normal((u_big - mu - 0.5) / sigma) : 1.0;

  const double ma = mean_of(a), mb = mean_of(b);
  const double va = sample_variance(a, ma) / n1, vb = sample_variance(b, mb) / n2;
  const double se2 = va + vb;
  if (se2 > 0) {
    s.welch_t = (ma - mb) / std::sqrt(se2);
    s.welch_df = se2 * se2 / (va * va / (n1 - 1.0) + vb * vb / (n2 - 1.0));
    s.welch_p = two_sided_t(s.welch_t, s.welch_df);
  } else if (ma == mb) {
    s.welch_t = 0;
    s.welch_df = n1 + n2 - 2.0;
    s.welch_p = 1.0;
  } else {
    throw Error(ErrorCode::DegenerateInput, "both groups are constant with different means");
  }
  return s;
}

double vector_speed(double u, double v) { return std::hypot(u, v); }

Grid3D time_mean(const Grid4D& grid) {
  Grid3D out{grid.depths(), grid.lats(), grid.lons(), {}, grid.units()};
  const std::size_t cells = grid.nz() * grid.ny() * grid.nx();
  std::vector<double> sum(cells, 0.0);
  std::vector<std::size_t> count(cells, 0);
  for (std::size_t it = 0; it < grid.nt(); ++it) {
    for (std::size_t c = 0; c < cells; ++c) {
      const double v = grid.values()[it * cells + c];
      if (is_missing(v)) continue;
      sum[c] += v;
      ++count[c];
    }
  }
  out.values.resize(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    out.values[c] = count[c] ? sum[c] / static_cast<double>(count[c]) : kMissing;
  }
  return out;
}

double log10p1(double x) {
  if (!(x >= 0)) throw Error(ErrorCode::NegativeInput, "log10(x+1) needs x >= 0");
  return std::log10(x + 1.0);
}

const std::array<std::string, 16>& compass_sectors() {
  static const std::array<std::string, 16> names = {"N",  "NNE", "NE", "ENE", "E",  "ESE",
                                                    "SE", "SSE", "S",  "SSW", "SW", "WSW",
                                                    "W",  "WNW", "NW", "NNW"};
  return names;
}

std::size_t wind_sector(double direction_deg) {
  double d = std::fmod(direction_deg + 11.25, 360.0);
  if (d < 0) d += 360.0;
  const auto s = static_cast<std::size_t>(std::floor(d / 22.5));
  return std::min<std::size_t>(s, 15);
}

const std::vector<double>& beaufort_edges() {
  static const std::vector<double> edges = {
      0,    0.5,  1.6,  3.4,  5.5,  8.0,  10.8,
      13.9, 17.2, 20.8, 24.5, 28.5, std::numeric_limits<double>::infinity()};
  return edges;
}

const std::vector<std::string>& beaufort_labels() {
  static const std::vector<std::string> labels = {
      "Calm",          "Light air",  "Light breeze", "Gentle breeze",
      "Moderate breeze", "Fresh breeze", "Strong breeze", "Near gale",
      "Gale",          "Strong gale", "Storm",        "Violent storm+"};
  return labels;
}

long WindRoseTable::total() const {
  long t = 0;
  for (const auto& row : counts) t += std::accumulate(row.begin(), row.end(), 0L);
  return t;
}

WindRoseTable wind_rose(std::span<const double> dirs_deg, std::span<const double> speeds,
                        std::span<const double> edges, const std::vector<std::string>& labels) {
  if (labels.size() + 1 != edges.size()) {
    throw Error(ErrorCode::LabelEdgeMismatch,
                "bin labels must be one fewer than bin edges: got " +
                    std::to_string(labels.size()) + " labels for " + std::to_string(edges.size()) +
                    " edges");
  }
  if (edges.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "speed edges must strictly increase");
    }
  }
  if (dirs_deg.size() != speeds.size()) {
    throw Error(ErrorCode::InvalidArgument, "direction and speed lengths differ");
  }
  WindRoseTable table;
  table.sectors = compass_sectors();
  table.categories = labels;
  table.counts.assign(16, std::vector<long>(labels.size(), 0));
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    const double dir = dirs_deg[i], spd = speeds[i];
    if (!std::isfinite(dir) || !std::isfinite(spd) || spd < edges.front()) {
      ++table.excluded;
      continue;
    }
    auto it = std::upper_bound(edges.begin(), edges.end(), spd);
    std::size_t cat = static_cast<std::size_t>(it - edges.begin()) - 1;
    if (cat >= labels.size()) cat = labels.size() - 1;
    ++table.counts[wind_sector(dir)][cat];
  }
  return table;
}

}  // namespace geoagent::geo
