// Copyright 2026 The jtcr Authors. All Rights Reserved.
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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "jtcr/common.hpp"
#include "jtcr/data.hpp"

namespace jtcr::temporal {

/// Calendar month as year * 12 + (month - 1), UTC.
inline int month_key(std::int64_t timestamp) {
  using namespace std::chrono;
  const year_month_day ymd{floor<days>(sys_seconds{seconds{timestamp}})};
  return static_cast<int>(ymd.year()) * 12 + static_cast<int>(static_cast<unsigned>(ymd.month())) - 1;
}

inline std::string month_label(int key) {
  const int y = key >= 0 ? key / 12 : (key - 11) / 12;
  const int m = key - y * 12 + 1;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d", y, m);
  return buf;
}

/// Inclusive month range [first, last] covered by a dataset's check-ins.
struct MonthRange {
  int first = 0;
  int last = -1;
  std::size_t size() const noexcept { return last >= first ? static_cast<std::size_t>(last - first + 1) : 0; }
};

inline MonthRange month_range(const data::Dataset& ds) {
  if (ds.empty()) return {};
  auto [lo, hi] = std::minmax_element(ds.checkins().begin(), ds.checkins().end(),
                                      [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return {month_key(lo->timestamp), month_key(hi->timestamp)};
}

struct UserOwner {
  Index user = 0;
};
struct CategoryOwner {
  std::string category;
};
using Owner = std::variant<UserOwner, CategoryOwner>;

/// Normalized monthly check-in distribution of one user or category.
struct MonthlySeries {
  MonthRange range;
  std::vector<std::size_t> counts;  // one per month in range
  std::vector<double> shares;       // counts / total_count, or all 0 if empty
  std::size_t total_count = 0;

  void normalize() {
    shares.assign(counts.size(), 0.0);
    if (total_count == 0) return;
    for (std::size_t b = 0; b < counts.size(); ++b)
      shares[b] = static_cast<double>(counts[b]) / static_cast<double>(total_count);
  }
};

/// Monthly series of an owner over the dataset's full month range. Months
/// without check-ins are kept as zero-share bins.
inline MonthlySeries monthly_series(const data::Dataset& ds, const Owner& owner) {
  MonthlySeries s;
  s.range = month_range(ds);
  s.counts.assign(s.range.size(), 0);
  bool known = false;
  if (const auto* u = std::get_if<UserOwner>(&owner)) {
    known = u->user < ds.num_users();
    if (known)
      for (const auto& c : ds.checkins())
        if (c.user == u->user) ++s.counts[month_key(c.timestamp) - s.range.first];
  } else {
    const auto& cat = std::get<CategoryOwner>(owner).category;
    for (const auto& p : ds.pois()) known = known || p.category_key() == cat;
    if (known)
      for (const auto& c : ds.checkins())
        if (ds.poi(c.poi).category_key() == cat) ++s.counts[month_key(c.timestamp) - s.range.first];
  }
  if (!known) throw ConfigError("unknown series owner");
  s.total_count = std::accumulate(s.counts.begin(), s.counts.end(), std::size_t{0});
  s.normalize();
  return s;
}

/// Population variance of the monthly shares.
inline double activity_variance(const MonthlySeries& s) {
  if (s.total_count == 0 || s.shares.empty()) throw ConfigError("empty monthly series");
  const double n = static_cast<double>(s.shares.size());
  double mean = 0.0;
  for (double x : s.shares) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : s.shares) var += (x - mean) * (x - mean);
  return var / n;
}

/// lambda * log(1 + exp(-variance)).
inline double time_sensitive_coefficient(double variance, double lambda) {
  return lambda * std::log1p(std::exp(-variance));
}

/// Per-user and per-POI shrinkage coefficients.
struct RegularizerVectors {
  double lambda = 0.0;
  std::vector<double> sigma2_u;
  std::vector<double> sigma2_v;
  std::vector<double> lambda_u;
  std::vector<double> lambda_v;

  /// Every coefficient equal to lambda.
  static RegularizerVectors uniform(std::size_t n, std::size_t m, double lambda) {
    RegularizerVectors r;
    r.lambda = lambda;
    r.sigma2_u.assign(n, 0.0);
    r.sigma2_v.assign(m, 0.0);
    r.lambda_u.assign(n, lambda);
    r.lambda_v.assign(m, lambda);
    return r;
  }
};

/// Monthly series for every user and every category key in one pass.
struct AllSeries {
  std::vector<MonthlySeries> users;
  std::map<std::string, MonthlySeries> categories;
};

inline AllSeries all_series(const data::Dataset& ds) {
  AllSeries out;
  const MonthRange range = month_range(ds);
  MonthlySeries blank;
  blank.range = range;
  blank.counts.assign(range.size(), 0);
  out.users.assign(ds.num_users(), blank);
  for (const auto& p : ds.pois()) out.categories.try_emplace(p.category_key(), blank);
  std::vector<MonthlySeries*> poi_series(ds.num_pois());
  for (Index j = 0; j < ds.num_pois(); ++j) poi_series[j] = &out.categories[ds.poi(j).category_key()];
  for (const auto& c : ds.checkins()) {
    const auto b = static_cast<std::size_t>(month_key(c.timestamp) - range.first);
    ++out.users[c.user].counts[b];
    ++out.users[c.user].total_count;
    ++poi_series[c.poi]->counts[b];
    ++poi_series[c.poi]->total_count;
  }
  for (auto& s : out.users) s.normalize();
  for (auto& [k, s] : out.categories) s.normalize();
  return out;
}

/// Variance of a series, or 0 when it has no check-ins.
inline double variance_or_zero(const MonthlySeries& s) {
  return s.total_count == 0 ? 0.0 : activity_variance(s);
}

/// Per-user variance comes from the user's own series; per-POI variance from
/// the series of the POI's category. Owners with no check-ins in `ds` get
/// variance 0.
inline RegularizerVectors regularizer_vectors(const data::Dataset& ds, double lambda) {
  if (lambda < 0.0) throw ConfigError("lambda must be non-negative");
  const AllSeries series = all_series(ds);
  RegularizerVectors r;
  r.lambda = lambda;
  r.sigma2_u.resize(ds.num_users());
  r.lambda_u.resize(ds.num_users());
  for (Index i = 0; i < ds.num_users(); ++i) {
    r.sigma2_u[i] = variance_or_zero(series.users[i]);
    r.lambda_u[i] = time_sensitive_coefficient(r.sigma2_u[i], lambda);
  }
  std::map<std::string, double> cat_var;
  for (const auto& [k, s] : series.categories) cat_var[k] = variance_or_zero(s);
  r.sigma2_v.resize(ds.num_pois());
  r.lambda_v.resize(ds.num_pois());
  for (Index j = 0; j < ds.num_pois(); ++j) {
    r.sigma2_v[j] = cat_var.at(ds.poi(j).category_key());
    r.lambda_v[j] = time_sensitive_coefficient(r.sigma2_v[j], lambda);
  }
  return r;
}

/// Average ranks (1-based), ties share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ConfigError("spearman: length mismatch");
  if (x.size() < 2) throw ConfigError("spearman: need at least two observations");
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw ConfigError("spearman: constant input, correlation undefined");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace jtcr::temporal
