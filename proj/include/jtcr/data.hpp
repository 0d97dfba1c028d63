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

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "jtcr/common.hpp"

namespace jtcr::data {

enum class Format { tsv, csv };

/// One observed visit, as read from the input file.
struct CheckinRecord {
  std::string user_id;
  std::string poi_id;
  std::int64_t timestamp = 0;  // UTC seconds since epoch
  double lat = 0.0;
  double lon = 0.0;
  std::optional<std::string> category;
};

/// A check-in with dense user/POI indices.
struct Checkin {
  Index user = 0;
  Index poi = 0;
  std::int64_t timestamp = 0;

  friend bool operator==(const Checkin&, const Checkin&) = default;
};

struct Poi {
  std::string id;
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
  std::optional<std::string> category;

  /// The category key, or the POI id when no category was given.
  const std::string& category_key() const { return category ? *category : id; }

  friend bool operator==(const Poi&, const Poi&) = default;
};

/// Check-ins plus the dense user and POI indexes they refer to.
class Dataset {
 public:
  std::size_t num_users() const noexcept { return user_ids_.size(); }
  std::size_t num_pois() const noexcept { return pois_.size(); }
  std::size_t num_checkins() const noexcept { return checkins_.size(); }
  bool empty() const noexcept { return checkins_.empty(); }

  const std::vector<Checkin>& checkins() const noexcept { return checkins_; }
  const std::vector<std::string>& user_ids() const noexcept { return user_ids_; }
  const std::vector<Poi>& pois() const noexcept { return pois_; }
  const Poi& poi(Index j) const { return pois_.at(j); }
  const std::string& user_id(Index i) const { return user_ids_.at(i); }

  std::optional<Index> find_user(std::string_view id) const {
    auto it = user_index_.find(std::string(id));
    if (it == user_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<Index> find_poi(std::string_view id) const {
    auto it = poi_index_.find(std::string(id));
    if (it == poi_index_.end()) return std::nullopt;
    return it->second;
  }

  CheckinRecord record(std::size_t c) const {
    const Checkin& ck = checkins_.at(c);
    const Poi& p = pois_[ck.poi];
    return {user_ids_[ck.user], p.id, ck.timestamp, p.lat, p.lon, p.category};
  }

  Index add_user(const std::string& id) {
    auto [it, inserted] = user_index_.try_emplace(id, static_cast<Index>(user_ids_.size()));
    if (inserted) user_ids_.push_back(id);
    return it->second;
  }

  /// Registers a POI or checks it against the existing entry.
  Index add_poi(const Poi& poi) {
    auto [it, inserted] = poi_index_.try_emplace(poi.id, static_cast<Index>(pois_.size()));
    if (inserted) {
      pois_.push_back(poi);
    } else {
      const Poi& have = pois_[it->second];
      if (have.lat != poi.lat || have.lon != poi.lon)
        throw DataError("conflicting coordinates for poi '" + poi.id + "'");
      if (have.category != poi.category)
        throw DataError("conflicting category for poi '" + poi.id + "'");
    }
    return it->second;
  }

  void add_checkin(Index user, Index poi, std::int64_t timestamp) {
    if (user >= user_ids_.size() || poi >= pois_.size())
      throw DataError("check-in references an unindexed user or poi");
    checkins_.push_back({user, poi, timestamp});
  }

  void add(const CheckinRecord& r) {
    Index u = add_user(r.user_id);
    Index p = add_poi({r.poi_id, r.lat, r.lon, r.category});
    add_checkin(u, p, r.timestamp);
  }

  /// Same user and POI tables, different check-ins.
  Dataset with_checkins(std::vector<Checkin> checkins) const {
    Dataset out;
    out.user_ids_ = user_ids_;
    out.user_index_ = user_index_;
    out.pois_ = pois_;
    out.poi_index_ = poi_index_;
    out.checkins_ = std::move(checkins);
    return out;
  }

  /// Check-in counts per user and per POI.
  std::vector<std::size_t> user_counts() const {
    std::vector<std::size_t> c(num_users(), 0);
    for (const auto& ck : checkins_) ++c[ck.user];
    return c;
  }
  std::vector<std::size_t> poi_counts() const {
    std::vector<std::size_t> c(num_pois(), 0);
    for (const auto& ck : checkins_) ++c[ck.poi];
    return c;
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.user_ids_ == b.user_ids_ && a.pois_ == b.pois_ && a.checkins_ == b.checkins_;
  }

 private:
  std::vector<Checkin> checkins_;
  std::vector<std::string> user_ids_;
  std::unordered_map<std::string, Index> user_index_;
  std::vector<Poi> pois_;
  std::unordered_map<std::string, Index> poi_index_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Splits one line. In csv mode double-quoted fields may contain commas and
/// "" escapes.
inline std::vector<std::string> split_fields(std::string_view line, Format fmt) {
  std::vector<std::string> out;
  const char delim = fmt == Format::tsv ? '\t' : ',';
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (fmt == Format::csv && c == '"') {
      if (quoted && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else {
        quoted = !quoted;
      }
    } else if (c == delim && !quoted) {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.emplace_back(trim(cur));
  return out;
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

/// Parses a UTC timestamp. Accepts integer epoch seconds,
/// "YYYY-MM-DDTHH:MM:SS[Z]" and "YYYY-MM-DD HH:MM:SS".
inline std::optional<std::int64_t> parse_timestamp(std::string_view s) {
  s = detail::trim(s);
  std::int64_t epoch = 0;
  if (detail::parse_int(s, epoch)) return epoch;
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  if (s.size() != 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':')
    return std::nullopt;
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, se = 0;
  if (!detail::parse_int(s.substr(0, 4), y) || !detail::parse_int(s.substr(5, 2), mo) ||
      !detail::parse_int(s.substr(8, 2), d) || !detail::parse_int(s.substr(11, 2), h) ||
      !detail::parse_int(s.substr(14, 2), mi) || !detail::parse_int(s.substr(17, 2), se))
    return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || se > 60) return std::nullopt;
  const auto tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{se};
  return tp.time_since_epoch().count();
}

/// Reads check-ins from a stream. Columns: user, poi, timestamp, lat, lon,
/// optional category. Blank lines and lines starting with '#' are skipped.
/// Dense indices follow first appearance.
inline Dataset parse_checkins(std::istream& in, Format fmt) {
  Dataset ds;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw DataError("line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    std::string_view view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto f = detail::split_fields(view, fmt);
    if (f.size() < 5 || f.size() > 6) fail("expected 5 or 6 fields, got " + std::to_string(f.size()));
    if (f[0].empty() || f[1].empty()) fail("empty user or poi id");
    CheckinRecord r;
    r.user_id = f[0];
    r.poi_id = f[1];
    auto ts = parse_timestamp(f[2]);
    if (!ts) fail("unparseable timestamp '" + f[2] + "'");
    r.timestamp = *ts;
    if (!detail::parse_double(f[3], r.lat) || r.lat < -90.0 || r.lat > 90.0)
      fail("bad latitude '" + f[3] + "'");
    if (!detail::parse_double(f[4], r.lon) || r.lon < -180.0 || r.lon > 180.0)
      fail("bad longitude '" + f[4] + "'");
    if (f.size() == 6 && !f[5].empty()) r.category = f[5];
    try {
      ds.add(r);
    } catch (const DataError& e) {
      fail(e.what());
    }
  }
  if (in.bad()) throw DataError("read error");
  return ds;
}

inline Dataset parse_checkins(const std::string& path, Format fmt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_checkins(in, fmt);
}

inline Dataset parse_checkins_string(const std::string& text, Format fmt) {
  std::istringstream in(text);
  return parse_checkins(in, fmt);
}

/// Keeps the check-ins whose user and POI are flagged, re-densifying indices
/// in their previous relative order.
inline Dataset compact(const Dataset& ds, const std::vector<bool>& keep_user,
                       const std::vector<bool>& keep_poi) {
  Dataset out;
  std::vector<Index> umap(ds.num_users()), pmap(ds.num_pois());
  for (Index i = 0; i < ds.num_users(); ++i)
    if (keep_user[i]) umap[i] = out.add_user(ds.user_id(i));
  for (Index j = 0; j < ds.num_pois(); ++j)
    if (keep_poi[j]) pmap[j] = out.add_poi(ds.poi(j));
  for (const auto& c : ds.checkins())
    if (keep_user[c.user] && keep_poi[c.poi]) out.add_checkin(umap[c.user], pmap[c.poi], c.timestamp);
  return out;
}

/// Repeatedly drops users and POIs with fewer than min_count check-ins until
/// nothing changes. Entities with zero remaining check-ins are dropped too.
inline Dataset filter_min_activity(const Dataset& ds, std::size_t min_count) {
  if (min_count < 1) throw ConfigError("min_count must be >= 1");
  std::vector<bool> alive(ds.num_checkins(), true);
  std::vector<std::size_t> uc = ds.user_counts(), pc = ds.poi_counts();
  const auto& cks = ds.checkins();
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t c = 0; c < cks.size(); ++c) {
      if (!alive[c]) continue;
      if (uc[cks[c].user] < min_count || pc[cks[c].poi] < min_count) {
        alive[c] = false;
        changed = true;
      }
    }
    if (changed) {
      std::fill(uc.begin(), uc.end(), 0);
      std::fill(pc.begin(), pc.end(), 0);
      for (std::size_t c = 0; c < cks.size(); ++c) {
        if (!alive[c]) continue;
        ++uc[cks[c].user];
        ++pc[cks[c].poi];
      }
    }
  }
  std::vector<bool> keep_u(ds.num_users()), keep_p(ds.num_pois());
  for (std::size_t i = 0; i < uc.size(); ++i) keep_u[i] = uc[i] > 0;
  for (std::size_t j = 0; j < pc.size(); ++j) keep_p[j] = pc[j] > 0;
  return compact(ds, keep_u, keep_p);
}

struct SplitRatios {
  double train = 0.70;
  double validation = 0.10;
  double test = 0.20;
};

/// Three views over one user/POI index.
struct SplitDataset {
  Dataset train;
  Dataset validation;
  Dataset test;
  SplitRatios ratios;
};

/// Per-user chronological split: the first floor(train*c) check-ins of each
/// user go to train, the next floor(validation*c) to validation, the rest to
/// test. Equal timestamps keep input order.
inline SplitDataset chronological_split(const Dataset& ds, SplitRatios ratios = {}) {
  if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9)
    throw ConfigError("split ratios must sum to 1");
  if (ratios.train < 0 || ratios.validation < 0 || ratios.test < 0)
    throw ConfigError("split ratios must be non-negative");
  std::vector<std::vector<std::size_t>> per_user(ds.num_users());
  const auto& cks = ds.checkins();
  for (std::size_t c = 0; c < cks.size(); ++c) per_user[cks[c].user].push_back(c);

  enum Part : unsigned char { kTrain, kVal, kTest };
  std::vector<Part> part(cks.size(), kTest);
  for (auto& idx : per_user) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return cks[a].timestamp < cks[b].timestamp; });
    const std::size_t c = idx.size();
    // Guard against 0.7 * 10 landing just below 7.
    const auto n_train = static_cast<std::size_t>(std::floor(ratios.train * c + 1e-9));
    const auto n_val = static_cast<std::size_t>(std::floor(ratios.validation * c + 1e-9));
    for (std::size_t r = 0; r < c; ++r)
      part[idx[r]] = r < n_train ? kTrain : (r < n_train + n_val ? kVal : kTest);
  }
  std::vector<Checkin> tr, va, te;
  for (std::size_t c = 0; c < cks.size(); ++c) {
    (part[c] == kTrain ? tr : part[c] == kVal ? va : te).push_back(cks[c]);
  }
  return {ds.with_checkins(std::move(tr)), ds.with_checkins(std::move(va)),
          ds.with_checkins(std::move(te)), ratios};
}

}  // namespace jtcr::data
