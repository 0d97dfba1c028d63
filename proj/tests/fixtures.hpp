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

// Random instances and synthetic check-in data for tests.

#pragma once

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "jtcr/data.hpp"
#include "jtcr/geo.hpp"
#include "jtcr/interactions.hpp"
#include "jtcr/model.hpp"
#include "jtcr/temporal.hpp"
#include "oracles.hpp"

namespace fixture {

using jtcr::Index;

struct Instance {
  jtcr::data::Dataset ds;  // POI table only; check-ins are not used
  std::map<std::pair<Index, Index>, std::size_t> counts;
  jtcr::data::InteractionStore store;
  jtcr::geo::GeoIndex geo;
  jtcr::temporal::RegularizerVectors reg;
  jtcr::model::LatentModel model;
  oracle::Sets sets;
};

/// Random relevance structure with visit counts in {0,1,2,3}, POIs scattered
/// over a few km, factors N(0, scale^2) and random regularizer coefficients.
inline Instance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t m, int d, double alpha,
                                double scale = 0.7, double lambda = 0.05) {
  Instance in;
  std::uniform_real_distribution<double> lat(1.28, 1.36), lon(103.80, 103.90), unit(0.0, 1.0);
  for (Index i = 0; i < n; ++i) in.ds.add_user("u" + std::to_string(i));
  for (Index j = 0; j < m; ++j) in.ds.add_poi({"p" + std::to_string(j), lat(rng), lon(rng), std::nullopt});
  std::discrete_distribution<int> visits({0.55, 0.25, 0.12, 0.08});
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j)
      if (int c = visits(rng); c > 0) in.counts[{i, j}] = static_cast<std::size_t>(c);
  std::vector<std::vector<Index>> all(n);
  for (auto& a : all)
    for (Index j = 0; j < m; ++j) a.push_back(j);
  in.store = jtcr::data::InteractionStore::from_counts(n, m, in.counts, all);
  in.geo = jtcr::data::geo_index(in.ds);
  in.reg.lambda = lambda;
  for (Index i = 0; i < n; ++i) {
    in.reg.sigma2_u.push_back(0.5 * unit(rng));
    in.reg.lambda_u.push_back(jtcr::temporal::time_sensitive_coefficient(in.reg.sigma2_u.back(), lambda));
  }
  for (Index j = 0; j < m; ++j) {
    in.reg.sigma2_v.push_back(0.5 * unit(rng));
    in.reg.lambda_v.push_back(jtcr::temporal::time_sensitive_coefficient(in.reg.sigma2_v.back(), lambda));
  }
  std::normal_distribution<double> g(0.0, scale);
  in.model.U.resize(d, static_cast<Eigen::Index>(n));
  in.model.V.resize(d, static_cast<Eigen::Index>(m));
  for (Eigen::Index k = 0; k < in.model.U.size(); ++k) in.model.U.data()[k] = g(rng);
  for (Eigen::Index k = 0; k < in.model.V.size(); ++k) in.model.V.data()[k] = g(rng);
  in.model.alpha = alpha;
  in.sets = oracle::sets_from_counts(in.counts, n, m);
  return in;
}

/// Two users with disjoint tastes over six POIs. User 0 visits POI 0 three
/// times and POIs 1, 2 once; user 1 visits POI 3 three times and POIs 4, 5
/// once.
struct Planted {
  jtcr::data::InteractionStore store;
  jtcr::geo::GeoIndex geo;
  jtcr::temporal::RegularizerVectors reg;
};

inline Planted planted_instance(double lambda) {
  jtcr::data::Dataset ds;
  for (Index j = 0; j < 6; ++j) ds.add_poi({"p" + std::to_string(j), 1.30 + 0.01 * j, 103.80, std::nullopt});
  const std::map<std::pair<Index, Index>, std::size_t> counts{{{0, 0}, 3}, {{0, 1}, 1}, {{0, 2}, 1},
                                                              {{1, 3}, 3}, {{1, 4}, 1}, {{1, 5}, 1}};
  std::vector<std::vector<Index>> all(2, {0, 1, 2, 3, 4, 5});
  return {jtcr::data::InteractionStore::from_counts(2, 6, counts, all), jtcr::data::geo_index(ds),
          jtcr::temporal::RegularizerVectors::uniform(2, 6, lambda)};
}

/// Visited-above-unvisited and multi-above-single inversion counts.
inline std::pair<std::size_t, std::size_t> inversions(const jtcr::model::LatentModel& m,
                                                      const jtcr::data::InteractionStore& s) {
  std::size_t first = 0, second = 0;
  for (Index i = 0; i < s.num_users(); ++i) {
    for (Index k : s.plus(i))
      for (Index j : s.minus(i))
        if (jtcr::model::score(m, i, k) <= jtcr::model::score(m, i, j)) ++first;
    for (Index k : s.star(i))
      for (Index j : s.single(i))
        if (jtcr::model::score(m, i, k) <= jtcr::model::score(m, i, j)) ++second;
  }
  return {first, second};
}

inline std::string format_time(std::int64_t t) {
  using namespace std::chrono;
  const auto tp = sys_seconds{seconds{t}};
  const auto dp = floor<days>(tp);
  const year_month_day ymd{dp};
  const hh_mm_ss hms{tp - dp};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", int(ymd.year()), unsigned(ymd.month()),
                unsigned(ymd.day()), long(hms.hours().count()), long(hms.minutes().count()),
                long(hms.seconds().count()));
  return buf;
}

/// Synthetic check-ins: users belong to one of `groups` taste groups, each
/// group prefers a block of POIs located in its own neighborhood. Users
/// revisit favourite POIs, so multiple check-ins occur.
inline std::vector<jtcr::data::CheckinRecord> synthetic_checkins(std::uint64_t seed, std::size_t users,
                                                                 std::size_t pois, std::size_t groups = 3,
                                                                 std::size_t per_user = 30) {
  std::mt19937_64 rng(seed);
  std::vector<jtcr::data::CheckinRecord> recs;
  std::vector<std::pair<double, double>> coords(pois);
  const char* cats[] = {"Cafe", "Bar", "Park", "Museum", "Mall"};
  std::normal_distribution<double> jitter(0.0, 0.01);
  for (std::size_t j = 0; j < pois; ++j) {
    const std::size_t grp = j % groups;
    coords[j] = {1.30 + 0.05 * static_cast<double>(grp) + jitter(rng), 103.80 + 0.05 * static_cast<double>(grp) + jitter(rng)};
  }
  const std::int64_t t0 = 1280620800;  // 2010-08-01
  std::uniform_int_distribution<std::int64_t> when(0, 365LL * 86400);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t u = 0; u < users; ++u) {
    const std::size_t grp = u % groups;
    std::vector<std::size_t> mine, other;
    for (std::size_t j = 0; j < pois; ++j) (j % groups == grp ? mine : other).push_back(j);
    std::vector<std::size_t> favs;
    for (int f = 0; f < 3; ++f) favs.push_back(mine[(u * 7 + static_cast<std::size_t>(f) * 3) % mine.size()]);
    for (std::size_t c = 0; c < per_user; ++c) {
      std::size_t j;
      const double r = unit(rng);
      if (r < 0.45)
        j = favs[static_cast<std::size_t>(unit(rng) * favs.size()) % favs.size()];
      else if (r < 0.9)
        j = mine[static_cast<std::size_t>(unit(rng) * mine.size()) % mine.size()];
      else
        j = other[static_cast<std::size_t>(unit(rng) * other.size()) % other.size()];
      recs.push_back({"user" + std::to_string(u), "poi" + std::to_string(j), t0 + when(rng), coords[j].first,
                      coords[j].second, std::string(cats[j % 5])});
    }
  }
  return recs;
}

inline void write_csv(const std::filesystem::path& path, const std::vector<jtcr::data::CheckinRecord>& recs) {
  std::ofstream out(path);
  for (const auto& r : recs) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f", r.lat, r.lon);
    out << r.user_id << "," << r.poi_id << "," << format_time(r.timestamp) << "," << buf;
    if (r.category) out << "," << *r.category;
    out << "\n";
  }
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("jtcr_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace fixture
