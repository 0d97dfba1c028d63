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
#include <map>
#include <unordered_map>
#include <span>
#include <variant>
#include <vector>

#include "jtcr/common.hpp"
#include "jtcr/data.hpp"
#include "jtcr/geo.hpp"

namespace jtcr::data {

struct AllPois {};
struct NeighborhoodRadius {
  double radius_km = 0.0;
};
/// Which unvisited POIs count as irrelevant for a user.
using CandidateUniverse = std::variant<AllPois, NeighborhoodRadius>;

/// Per-user relevance sets built from training check-in multiplicities.
/// All index lists are sorted ascending.
class InteractionStore {
 public:
  struct UserSets {
    std::vector<Index> star;    // visited >= 2 times
    std::vector<Index> single;  // visited exactly once
    std::vector<Index> plus;    // star U single
    std::vector<Index> minus;   // candidates not in plus
  };

  InteractionStore() = default;
  InteractionStore(std::size_t num_users, std::size_t num_pois)
      : users_(num_users), poi_plus_(num_pois), poi_star_(num_pois), poi_single_(num_pois),
        m_(num_pois) {}

  std::size_t num_users() const noexcept { return users_.size(); }
  std::size_t num_pois() const noexcept { return m_; }

  const UserSets& user(Index i) const { return users_.at(i); }
  std::span<const Index> star(Index i) const { return users_.at(i).star; }
  std::span<const Index> single(Index i) const { return users_.at(i).single; }
  std::span<const Index> plus(Index i) const { return users_.at(i).plus; }
  std::span<const Index> minus(Index i) const { return users_.at(i).minus; }

  std::size_t n_star(Index i) const { return users_.at(i).star.size(); }
  std::size_t n_single(Index i) const { return users_.at(i).single.size(); }
  std::size_t n_plus(Index i) const { return users_.at(i).plus.size(); }
  std::size_t n_minus(Index i) const { return users_.at(i).minus.size(); }

  /// Training visit count of (i, j); 0 if unvisited.
  std::size_t visits(Index i, Index j) const {
    auto it = counts_.find(key(i, j));
    return it == counts_.end() ? 0 : it->second;
  }

  std::span<const Index> poi_plus(Index j) const { return poi_plus_.at(j); }
  std::span<const Index> poi_star(Index j) const { return poi_star_.at(j); }
  std::span<const Index> poi_single(Index j) const { return poi_single_.at(j); }

  /// Users for whom j is an irrelevant candidate. Computed on demand.
  std::vector<Index> poi_minus(Index j) const {
    std::vector<Index> out;
    for (Index i = 0; i < users_.size(); ++i) {
      const auto& mn = users_[i].minus;
      if (std::binary_search(mn.begin(), mn.end(), j)) out.push_back(i);
    }
    return out;
  }

  /// Builds the store from explicit per-user visit counts.
  static InteractionStore from_counts(std::size_t num_users, std::size_t num_pois,
                                      const std::map<std::pair<Index, Index>, std::size_t>& counts,
                                      const std::vector<std::vector<Index>>& candidates) {
    InteractionStore s(num_users, num_pois);
    for (const auto& [ij, c] : counts) {
      if (c == 0) continue;
      auto [i, j] = ij;
      s.counts_[key(i, j)] = c;
      auto& u = s.users_.at(i);
      (c >= 2 ? u.star : u.single).push_back(j);
      u.plus.push_back(j);
      s.poi_plus_.at(j).push_back(i);
      (c >= 2 ? s.poi_star_ : s.poi_single_)[j].push_back(i);
    }
    // std::map iterates (i, j) in order, so every list is already sorted.
    for (Index i = 0; i < num_users; ++i) {
      auto& u = s.users_[i];
      for (Index j : candidates[i])
        if (!std::binary_search(u.plus.begin(), u.plus.end(), j)) u.minus.push_back(j);
    }
    return s;
  }

 private:
  static std::uint64_t key(Index i, Index j) { return (std::uint64_t{i} << 32) | j; }

  std::vector<UserSets> users_;
  std::vector<std::vector<Index>> poi_plus_, poi_star_, poi_single_;
  std::unordered_map<std::uint64_t, std::size_t> counts_;
  std::size_t m_ = 0;
};

inline geo::GeoIndex geo_index(const Dataset& ds) {
  std::vector<geo::GeoPoint> pts;
  pts.reserve(ds.num_pois());
  for (const auto& p : ds.pois()) pts.push_back(geo::GeoPoint::from_degrees(p.lat, p.lon));
  return geo::GeoIndex(std::move(pts));
}

/// Builds relevance sets from the check-ins of `ds` (normally the training
/// split). With NeighborhoodRadius the candidates of a user are the POIs
/// within the radius of any POI the user visited.
inline InteractionStore build_interactions(const Dataset& ds, CandidateUniverse universe = AllPois{}) {
  if (ds.num_users() == 0 || ds.num_pois() == 0) throw DataError("empty dataset");
  std::map<std::pair<Index, Index>, std::size_t> counts;
  for (const auto& c : ds.checkins()) ++counts[{c.user, c.poi}];

  std::vector<std::vector<Index>> candidates(ds.num_users());
  if (std::holds_alternative<AllPois>(universe)) {
    std::vector<Index> all(ds.num_pois());
    for (Index j = 0; j < all.size(); ++j) all[j] = j;
    std::fill(candidates.begin(), candidates.end(), all);
  } else {
    const double r = std::get<NeighborhoodRadius>(universe).radius_km;
    if (!(r > 0.0)) throw ConfigError("radius_km must be positive");
    const geo::GeoIndex gi = geo_index(ds);
    std::vector<std::vector<Index>> visited(ds.num_users());
    for (const auto& [ij, c] : counts) visited[ij.first].push_back(ij.second);
    for (Index i = 0; i < ds.num_users(); ++i) candidates[i] = gi.within_radius(visited[i], r);
  }
  return InteractionStore::from_counts(ds.num_users(), ds.num_pois(), counts, candidates);
}

/// Visit count per (user, POI) in a dataset.
inline std::map<std::pair<Index, Index>, std::size_t> pair_counts(const Dataset& ds) {
  std::map<std::pair<Index, Index>, std::size_t> counts;
  for (const auto& c : ds.checkins()) ++counts[{c.user, c.poi}];
  return counts;
}

/// Dataset-level summary in the shape of a statistics table.
struct DatasetSummary {
  std::size_t users = 0;
  std::size_t pois = 0;
  std::size_t checkins = 0;
  double avg_pois_per_user = 0.0;  // distinct POIs per user
  double avg_users_per_poi = 0.0;  // distinct users per POI
  double multiple_checkin_share = 0.0;  // check-ins on (user, POI) pairs visited >1 times
  double density = 0.0;  // distinct (user, POI) pairs / (users * POIs)
};

inline DatasetSummary summarize(const Dataset& ds) {
  DatasetSummary s;
  s.users = ds.num_users();
  s.pois = ds.num_pois();
  s.checkins = ds.num_checkins();
  if (s.checkins == 0) return s;
  const auto counts = pair_counts(ds);
  std::size_t multi = 0;
  for (const auto& [ij, c] : counts)
    if (c > 1) multi += c;
  const double pairs = static_cast<double>(counts.size());
  s.avg_pois_per_user = pairs / static_cast<double>(s.users);
  s.avg_users_per_poi = pairs / static_cast<double>(s.pois);
  s.multiple_checkin_share = static_cast<double>(multi) / static_cast<double>(s.checkins);
  s.density = pairs / (static_cast<double>(s.users) * static_cast<double>(s.pois));
  return s;
}

}  // namespace jtcr::data
