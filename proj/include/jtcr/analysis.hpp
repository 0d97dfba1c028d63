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
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "jtcr/data.hpp"
#include "jtcr/interactions.hpp"
#include "jtcr/temporal.hpp"

namespace jtcr::temporal {

struct AnalysisOptions {
  std::size_t top_categories = 8;
  std::size_t extremes = 5;
  // Users below this many check-ins are left out of the most-variant list.
  std::size_t most_variant_min_checkins = 50;
};

struct MonthTotal {
  std::string month;
  std::size_t checkins = 0;
};

struct CategoryMonth {
  std::string category;
  std::string month;
  std::size_t checkins = 0;
  double share = 0.0;  // of the category's own total
};

struct VarianceExtreme {
  std::string kind;     // "user" | "category"
  std::string extreme;  // "least" | "most"
  std::size_t rank = 0;
  std::string owner;
  std::size_t total = 0;
  double variance = 0.0;
  MonthlySeries series;
};

struct UserRepeatStats {
  std::string user;
  std::size_t checkins = 0;
  std::size_t single_checkins = 0;
  std::size_t multiple_checkins = 0;
  double multiple_share = 0.0;
};

struct Correlations {
  std::optional<double> user_variance_vs_checkins;
  std::optional<double> category_variance_vs_popularity;
  std::optional<double> user_checkins_vs_multiple_share;
};

struct AnalysisReport {
  data::DatasetSummary summary;
  std::vector<MonthTotal> monthly_totals;
  std::vector<CategoryMonth> category_popularity;
  std::vector<VarianceExtreme> variance_extremes;
  std::vector<UserRepeatStats> repeat_stats;
  Correlations correlations;
};

namespace detail {
inline std::optional<double> try_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  try {
    return spearman(x, y);
  } catch (const ConfigError&) {
    return std::nullopt;
  }
}
}  // namespace detail

inline AnalysisReport analysis_report(const data::Dataset& ds, const AnalysisOptions& opt = {}) {
  AnalysisReport rep;
  rep.summary = data::summarize(ds);
  if (ds.empty()) return rep;

  const AllSeries series = all_series(ds);
  const MonthRange range = month_range(ds);

  rep.monthly_totals.resize(range.size());
  for (std::size_t b = 0; b < range.size(); ++b)
    rep.monthly_totals[b].month = month_label(range.first + static_cast<int>(b));
  for (const auto& c : ds.checkins()) ++rep.monthly_totals[month_key(c.timestamp) - range.first].checkins;

  // Top categories by total check-ins; ties by key.
  std::vector<std::pair<std::string, const MonthlySeries*>> cats;
  for (const auto& [k, s] : series.categories) cats.emplace_back(k, &s);
  std::stable_sort(cats.begin(), cats.end(),
                   [](const auto& a, const auto& b) { return a.second->total_count > b.second->total_count; });
  for (std::size_t r = 0; r < std::min(opt.top_categories, cats.size()); ++r) {
    const auto& s = *cats[r].second;
    for (std::size_t b = 0; b < range.size(); ++b)
      rep.category_popularity.push_back(
          {cats[r].first, month_label(range.first + static_cast<int>(b)), s.counts[b], s.shares[b]});
  }

  // Variance extremes.
  std::vector<double> user_var(ds.num_users()), user_cnt(ds.num_users());
  for (Index i = 0; i < ds.num_users(); ++i) {
    user_var[i] = variance_or_zero(series.users[i]);
    user_cnt[i] = static_cast<double>(series.users[i].total_count);
  }
  auto emit = [&](const std::string& kind, const std::string& extreme, const std::vector<std::size_t>& order,
                  auto owner_name, auto series_of, auto var_of) {
    for (std::size_t r = 0; r < std::min(opt.extremes, order.size()); ++r) {
      const std::size_t o = order[r];
      const MonthlySeries& s = series_of(o);
      rep.variance_extremes.push_back({kind, extreme, r + 1, owner_name(o), s.total_count, var_of(o), s});
    }
  };
  {
    std::vector<std::size_t> least(ds.num_users()), most;
    std::iota(least.begin(), least.end(), 0);
    for (std::size_t i = 0; i < ds.num_users(); ++i)
      if (series.users[i].total_count >= opt.most_variant_min_checkins) most.push_back(i);
    std::stable_sort(least.begin(), least.end(), [&](auto a, auto b) { return user_var[a] < user_var[b]; });
    std::stable_sort(most.begin(), most.end(), [&](auto a, auto b) { return user_var[a] > user_var[b]; });
    auto name = [&](std::size_t i) { return ds.user_id(static_cast<Index>(i)); };
    auto ser = [&](std::size_t i) -> const MonthlySeries& { return series.users[i]; };
    auto var = [&](std::size_t i) { return user_var[i]; };
    emit("user", "least", least, name, ser, var);
    emit("user", "most", most, name, ser, var);
  }
  std::vector<double> cat_var(cats.size()), cat_pop(cats.size());
  for (std::size_t c = 0; c < cats.size(); ++c) {
    cat_var[c] = variance_or_zero(*cats[c].second);
    cat_pop[c] = static_cast<double>(cats[c].second->total_count);
  }
  {
    std::vector<std::size_t> least(cats.size());
    std::iota(least.begin(), least.end(), 0);
    std::vector<std::size_t> most = least;
    std::stable_sort(least.begin(), least.end(), [&](auto a, auto b) { return cat_var[a] < cat_var[b]; });
    std::stable_sort(most.begin(), most.end(), [&](auto a, auto b) { return cat_var[a] > cat_var[b]; });
    auto name = [&](std::size_t c) { return cats[c].first; };
    auto ser = [&](std::size_t c) -> const MonthlySeries& { return *cats[c].second; };
    auto var = [&](std::size_t c) { return cat_var[c]; };
    emit("category", "least", least, name, ser, var);
    emit("category", "most", most, name, ser, var);
  }

  // Single vs multiple check-ins per user.
  rep.repeat_stats.resize(ds.num_users());
  for (Index i = 0; i < ds.num_users(); ++i) rep.repeat_stats[i].user = ds.user_id(i);
  for (const auto& [ij, c] : data::pair_counts(ds)) {
    auto& r = rep.repeat_stats[ij.first];
    r.checkins += c;
    (c > 1 ? r.multiple_checkins : r.single_checkins) += c;
  }
  std::vector<double> multi_share(ds.num_users());
  for (Index i = 0; i < ds.num_users(); ++i) {
    auto& r = rep.repeat_stats[i];
    r.multiple_share = r.checkins ? static_cast<double>(r.multiple_checkins) / static_cast<double>(r.checkins) : 0.0;
    multi_share[i] = r.multiple_share;
  }

  rep.correlations.user_variance_vs_checkins = detail::try_spearman(user_var, user_cnt);
  rep.correlations.category_variance_vs_popularity = detail::try_spearman(cat_var, cat_pop);
  rep.correlations.user_checkins_vs_multiple_share = detail::try_spearman(user_cnt, multi_share);
  return rep;
}

}  // namespace jtcr::temporal
