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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <tuple>

#include "fixtures.hpp"
#include "jtcr/data.hpp"
#include "jtcr/interactions.hpp"
#include "oracles.hpp"

namespace {

using namespace jtcr;
using namespace jtcr::data;

TEST(Parse, EmptyInput) {
  const Dataset ds = parse_checkins_string("", Format::csv);
  EXPECT_EQ(ds.num_users(), 0u);
  EXPECT_EQ(ds.num_pois(), 0u);
  EXPECT_EQ(ds.num_checkins(), 0u);
}

TEST(Parse, SingleRecord) {
  const Dataset ds = parse_checkins_string("u1,p1,2010-08-01T12:00:00Z,1.30,103.85,Bar\n", Format::csv);
  ASSERT_EQ(ds.num_users(), 1u);
  ASSERT_EQ(ds.num_pois(), 1u);
  ASSERT_EQ(ds.num_checkins(), 1u);
  const auto r = ds.record(0);
  EXPECT_EQ(r.user_id, "u1");
  EXPECT_EQ(r.poi_id, "p1");
  EXPECT_EQ(r.timestamp, 1280664000);
  EXPECT_EQ(*r.category, "Bar");
}

TEST(Parse, TimestampFormats) {
  EXPECT_EQ(*parse_timestamp("2010-08-01T12:00:00Z"), 1280664000);
  EXPECT_EQ(*parse_timestamp("2010-08-01 12:00:00"), 1280664000);
  EXPECT_EQ(*parse_timestamp("1280664000"), 1280664000);
  EXPECT_FALSE(parse_timestamp("2010-02-30T00:00:00Z"));
  EXPECT_FALSE(parse_timestamp("yesterday"));
}

TEST(Parse, TsvWithoutCategory) {
  const Dataset ds = parse_checkins_string("a\tx\t100\t1.0\t2.0\nb\tx\t200\t1.0\t2.0\n", Format::tsv);
  EXPECT_EQ(ds.num_users(), 2u);
  EXPECT_FALSE(ds.poi(0).category.has_value());
  EXPECT_EQ(ds.poi(0).category_key(), "x");
}

TEST(Parse, DenseIndicesInFirstAppearanceOrder) {
  const Dataset ds = parse_checkins_string("b,q,1,0,0\na,p,2,1,1\nb,p,3,1,1\n", Format::csv);
  EXPECT_EQ(ds.user_ids(), (std::vector<std::string>{"b", "a"}));
  EXPECT_EQ(ds.poi(0).id, "q");
  EXPECT_EQ(ds.poi(1).id, "p");
}

TEST(Parse, QuotedCsvCategory) {
  const Dataset ds = parse_checkins_string("u,p,1,0,0,\"Food, Asian\"\n", Format::csv);
  EXPECT_EQ(*ds.poi(0).category, "Food, Asian");
}

TEST(Parse, ErrorsNameTheLine) {
  auto message = [](const std::string& text) {
    try {
      parse_checkins_string(text, Format::csv);
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("u,p,1,0,0\nu,p,notatime,0,0\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("u,p,1,95,0\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("u,p,1,0\n").find("line 1"), std::string::npos);
  const auto conflict = message("u,p,1,0,0\nv,p,2,0,1\n");
  EXPECT_NE(conflict.find("line 2"), std::string::npos);
  EXPECT_NE(conflict.find("conflicting coordinates"), std::string::npos);
}

TEST(Parse, MissingFile) { EXPECT_THROW(parse_checkins("/nonexistent/file.csv", Format::csv), DataError); }

Dataset from_records(const std::vector<CheckinRecord>& recs) {
  Dataset ds;
  for (const auto& r : recs) ds.add(r);
  return ds;
}

std::vector<CheckinRecord> records(const Dataset& ds) {
  std::vector<CheckinRecord> out;
  for (std::size_t c = 0; c < ds.num_checkins(); ++c) out.push_back(ds.record(c));
  return out;
}

std::vector<std::tuple<std::string, std::string, std::int64_t>> key_multiset(const std::vector<CheckinRecord>& recs) {
  std::vector<std::tuple<std::string, std::string, std::int64_t>> out;
  for (const auto& r : recs) out.emplace_back(r.user_id, r.poi_id, r.timestamp);
  std::sort(out.begin(), out.end());
  return out;
}

TEST(Filter, FixedPointUnchanged) {
  std::vector<CheckinRecord> recs;
  for (int u = 0; u < 5; ++u)
    for (int p = 0; p < 5; ++p) recs.push_back({"u" + std::to_string(u), "p" + std::to_string(p), u * 10 + p, 1.0, 2.0 + p * 0.01, std::nullopt});
  const Dataset ds = from_records(recs);
  EXPECT_EQ(filter_min_activity(ds, 5), ds);
}

TEST(Filter, BelowThresholdEmpties) {
  std::vector<CheckinRecord> recs;
  for (int k = 0; k < 4; ++k) recs.push_back({"u", "p", k, 0, 0, std::nullopt});
  const Dataset out = filter_min_activity(from_records(recs), 5);
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(out.num_users(), 0u);
  EXPECT_EQ(out.num_pois(), 0u);
}

TEST(Filter, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> user(0, 24), poi(0, 29);
    std::vector<CheckinRecord> recs;
    for (int k = 0; k < 200; ++k) {
      const int p = poi(rng);
      recs.push_back({"u" + std::to_string(user(rng)), "p" + std::to_string(p), k, 1.0, 100.0 + p * 0.001, std::nullopt});
    }
    const Dataset got = filter_min_activity(from_records(recs), 3);
    EXPECT_EQ(key_multiset(records(got)), key_multiset(oracle::brute_force_filter(recs, 3))) << "seed " << seed;
  }
}

TEST(Filter, IdempotentAndThresholdHolds) {
  const Dataset ds = from_records(fixture::synthetic_checkins(5, 40, 60, 3, 8));
  for (std::size_t k : {1u, 3u, 5u, 8u}) {
    const Dataset f = filter_min_activity(ds, k);
    EXPECT_EQ(filter_min_activity(f, k), f);
    for (auto c : f.user_counts()) EXPECT_GE(c, k);
    for (auto c : f.poi_counts()) EXPECT_GE(c, k);
  }
  EXPECT_THROW(filter_min_activity(ds, 0), ConfigError);
}

TEST(Interactions, DirectCounting) {
  Dataset ds;
  for (const char* p : {"p1", "p2", "p3"}) ds.add_poi({p, 0, 0, std::nullopt});
  ds.add_user("u");
  ds.add_user("v");
  for (int k = 0; k < 3; ++k) ds.add_checkin(0, 0, k);
  ds.add_checkin(0, 1, 5);
  ds.add_checkin(1, 2, 6);
  const auto s = build_interactions(ds);
  EXPECT_EQ(std::vector<Index>(s.star(0).begin(), s.star(0).end()), std::vector<Index>{0});
  EXPECT_EQ(std::vector<Index>(s.single(0).begin(), s.single(0).end()), std::vector<Index>{1});
  EXPECT_EQ(std::vector<Index>(s.minus(0).begin(), s.minus(0).end()), std::vector<Index>{2});
  EXPECT_EQ(s.n_plus(0), 2u);
  EXPECT_EQ(s.visits(0, 0), 3u);
  EXPECT_EQ(s.visits(1, 0), 0u);
}

TEST(Interactions, NoNegativesWhenEverythingVisited) {
  Dataset ds;
  ds.add_user("u");
  ds.add_poi({"a", 0, 0, std::nullopt});
  ds.add_poi({"b", 0, 1, std::nullopt});
  ds.add_checkin(0, 0, 1);
  ds.add_checkin(0, 1, 2);
  EXPECT_TRUE(build_interactions(ds).minus(0).empty());
}

TEST(Interactions, EmptyDatasetRejected) { EXPECT_THROW(build_interactions(Dataset{}), DataError); }

TEST(Interactions, DualityAndPartition) {
  const Dataset ds = from_records(fixture::synthetic_checkins(9, 20, 30, 3, 10));
  for (const CandidateUniverse& universe : {CandidateUniverse{AllPois{}}, CandidateUniverse{NeighborhoodRadius{3.0}}}) {
    const auto s = build_interactions(ds, universe);
    for (Index i = 0; i < s.num_users(); ++i) {
      std::vector<Index> both;
      std::set_intersection(s.star(i).begin(), s.star(i).end(), s.single(i).begin(), s.single(i).end(),
                            std::back_inserter(both));
      EXPECT_TRUE(both.empty());
      std::set_intersection(s.plus(i).begin(), s.plus(i).end(), s.minus(i).begin(), s.minus(i).end(),
                            std::back_inserter(both));
      EXPECT_TRUE(both.empty());
      if (std::holds_alternative<AllPois>(universe)) {
        EXPECT_EQ(s.n_plus(i) + s.n_minus(i), s.num_pois());
      }
    }
    for (Index j = 0; j < s.num_pois(); ++j) {
      for (Index i = 0; i < s.num_users(); ++i) {
        auto in = [](auto span, Index x) { return std::binary_search(span.begin(), span.end(), x); };
        EXPECT_EQ(in(s.poi_plus(j), i), in(s.plus(i), j));
        EXPECT_EQ(in(s.poi_star(j), i), in(s.star(i), j));
        EXPECT_EQ(in(s.poi_single(j), i), in(s.single(i), j));
        const auto pm = s.poi_minus(j);
        EXPECT_EQ(std::binary_search(pm.begin(), pm.end(), i), in(s.minus(i), j));
      }
    }
  }
  EXPECT_THROW(build_interactions(ds, NeighborhoodRadius{0.0}), ConfigError);
}

TEST(Interactions, NeighborhoodLimitsCandidates) {
  Dataset ds;
  ds.add_user("u");
  ds.add_poi({"home", 1.30, 103.80, std::nullopt});
  ds.add_poi({"near", 1.30, 103.81, std::nullopt});  // ~1.1 km
  ds.add_poi({"far", 1.50, 104.10, std::nullopt});
  ds.add_checkin(0, 0, 1);
  const auto s = build_interactions(ds, NeighborhoodRadius{2.0});
  EXPECT_EQ(std::vector<Index>(s.minus(0).begin(), s.minus(0).end()), std::vector<Index>{1});
}

TEST(Summary, MultipleShareAndDensity) {
  // u1: p1 x3, p2 x1; u2: p1 x1 -> 5 check-ins, 3 on repeated pairs.
  const Dataset ds = parse_checkins_string("u1,p1,1,0,0\nu1,p1,2,0,0\nu1,p1,3,0,0\nu1,p2,4,0,1\nu2,p1,5,0,0\n", Format::csv);
  const auto s = summarize(ds);
  EXPECT_EQ(s.checkins, 5u);
  EXPECT_DOUBLE_EQ(s.multiple_checkin_share, 0.6);
  EXPECT_DOUBLE_EQ(s.density, 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(s.avg_pois_per_user, 1.5);
  EXPECT_DOUBLE_EQ(s.avg_users_per_poi, 1.5);
}

Dataset user_with(std::size_t count) {
  Dataset ds;
  ds.add_user("u");
  ds.add_poi({"p", 0, 0, std::nullopt});
  for (std::size_t k = 0; k < count; ++k) ds.add_checkin(0, 0, static_cast<std::int64_t>(100 - k));
  return ds;
}

TEST(Split, ExactRatios) {
  const auto s = chronological_split(user_with(10));
  EXPECT_EQ(s.train.num_checkins(), 7u);
  EXPECT_EQ(s.validation.num_checkins(), 1u);
  EXPECT_EQ(s.test.num_checkins(), 2u);
}

TEST(Split, FloorRuleForOneCheckin) {
  const auto s = chronological_split(user_with(1));
  EXPECT_EQ(s.train.num_checkins(), 0u);
  EXPECT_EQ(s.validation.num_checkins(), 0u);
  EXPECT_EQ(s.test.num_checkins(), 1u);
}

TEST(Split, RatiosMustSumToOne) {
  EXPECT_THROW(chronological_split(user_with(3), {0.7, 0.2, 0.2}), ConfigError);
}

TEST(Split, MatchesSortAndSliceOracle) {
  const Dataset ds = from_records(fixture::synthetic_checkins(17, 50, 40, 4, 13));
  const auto s = chronological_split(ds);
  for (Index i = 0; i < ds.num_users(); ++i) {
    std::vector<std::int64_t> times;
    for (const auto& c : ds.checkins())
      if (c.user == i) times.push_back(c.timestamp);
    std::sort(times.begin(), times.end());
    const std::size_t c = times.size(), ntr = c * 7 / 10, nva = c / 10;
    auto user_times = [&](const Dataset& part) {
      std::vector<std::int64_t> t;
      for (const auto& ck : part.checkins())
        if (ck.user == i) t.push_back(ck.timestamp);
      std::sort(t.begin(), t.end());
      return t;
    };
    EXPECT_EQ(user_times(s.train), std::vector<std::int64_t>(times.begin(), times.begin() + ntr));
    EXPECT_EQ(user_times(s.validation), std::vector<std::int64_t>(times.begin() + ntr, times.begin() + ntr + nva));
    EXPECT_EQ(user_times(s.test), std::vector<std::int64_t>(times.begin() + ntr + nva, times.end()));
  }
  EXPECT_EQ(s.train.num_checkins() + s.validation.num_checkins() + s.test.num_checkins(), ds.num_checkins());
  EXPECT_EQ(s.train.user_ids(), ds.user_ids());
  EXPECT_EQ(s.test.pois(), ds.pois());
}

TEST(Split, TiesKeepInputOrder) {
  Dataset ds;
  ds.add_user("u");
  for (int p = 0; p < 10; ++p) ds.add_poi({"p" + std::to_string(p), 0, 0, std::nullopt});
  for (Index p = 0; p < 10; ++p) ds.add_checkin(0, p, 42);
  const auto s = chronological_split(ds);
  ASSERT_EQ(s.train.num_checkins(), 7u);
  for (Index k = 0; k < 7; ++k) EXPECT_EQ(s.train.checkins()[k].poi, k);
  EXPECT_EQ(s.validation.checkins()[0].poi, 7u);
}

}  // namespace
