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
#include <cmath>
#include <functional>
#include <tuple>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "jtcr/checkpoint.hpp"
#include "jtcr/common.hpp"
#include "jtcr/data.hpp"
#include "jtcr/interactions.hpp"
#include "jtcr/model.hpp"

namespace jtcr::eval {

/// Graded relevance of one user's test POIs: 2 visited more than once,
/// 1 visited once. Absent POIs have relevance 0.
using UserLabels = std::unordered_map<Index, int>;

struct RelevanceLabels {
  std::vector<UserLabels> users;

  int rel(Index i, Index j) const {
    const auto& u = users.at(i);
    auto it = u.find(j);
    return it == u.end() ? 0 : it->second;
  }
};

inline RelevanceLabels relevance_labels(const data::Dataset& test) {
  RelevanceLabels l;
  l.users.resize(test.num_users());
  for (const auto& [ij, c] : data::pair_counts(test)) l.users[ij.first][ij.second] = c > 1 ? 2 : 1;
  return l;
}

/// Training-visited POIs per user, sorted.
inline std::vector<std::vector<Index>> visited_lists(const data::Dataset& train) {
  std::vector<std::vector<Index>> out(train.num_users());
  for (const auto& [ij, c] : data::pair_counts(train)) out[ij.first].push_back(ij.second);
  return out;
}

struct Scored {
  Index poi = 0;
  double score = 0.0;
};

/// Top-k POIs for user i by descending score, ties by ascending index,
/// skipping the sorted `exclude` list. Returns fewer than k when the
/// candidates run out.
inline std::vector<Scored> recommend_scored(const model::LatentModel& m, Index i, std::size_t k,
                                            std::span<const Index> exclude = {}) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (i >= m.num_users()) throw std::out_of_range("recommend: user out of range");
  const Eigen::VectorXd scores = m.V.transpose() * m.U.col(i);
  std::vector<Scored> cand;
  cand.reserve(static_cast<std::size_t>(scores.size()));
  for (Index j = 0; j < scores.size(); ++j)
    if (!std::binary_search(exclude.begin(), exclude.end(), j)) cand.push_back({j, scores[j]});
  auto better = [](const Scored& a, const Scored& b) { return a.score > b.score || (a.score == b.score && a.poi < b.poi); };
  const std::size_t take = std::min(k, cand.size());
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end(), better);
  cand.resize(take);
  return cand;
}

inline std::vector<Index> recommend(const model::LatentModel& m, Index i, std::size_t k,
                                    std::span<const Index> exclude = {}) {
  std::vector<Index> out;
  for (const auto& s : recommend_scored(m, i, k, exclude)) out.push_back(s.poi);
  return out;
}

/// Recommendations excluding the user's training POIs in `store`.
inline std::vector<Index> recommend(const model::LatentModel& m, Index i, const data::InteractionStore& store,
                                    std::size_t k) {
  return recommend(m, i, k, store.plus(i));
}

/// Hits with rel >= 1 among the first k recommendations, divided by k.
inline double precision_at_k(std::span<const Index> recs, const UserLabels& labels, std::size_t k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  std::size_t hits = 0;
  for (std::size_t r = 0; r < std::min(k, recs.size()); ++r) {
    auto it = labels.find(recs[r]);
    if (it != labels.end() && it->second >= 1) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

inline double gain(int rel) { return std::exp2(rel) - 1.0; }

inline double dcg_at_k(std::span<const int> rels, std::size_t k) {
  double dcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, rels.size()); ++r) dcg += gain(rels[r]) / std::log2(static_cast<double>(r) + 2.0);
  return dcg;
}

/// DCG of the recommendations over the DCG of the user's test labels sorted
/// by relevance. nullopt when the user has no test POIs.
inline std::optional<double> ndcg_at_k(std::span<const Index> recs, const UserLabels& labels, std::size_t k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  std::vector<int> ideal;
  for (const auto& [j, r] : labels)
    if (r > 0) ideal.push_back(r);
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = dcg_at_k(ideal, k);
  if (idcg == 0.0) return std::nullopt;
  std::vector<int> got;
  for (std::size_t r = 0; r < std::min(k, recs.size()); ++r) {
    auto it = labels.find(recs[r]);
    got.push_back(it == labels.end() ? 0 : it->second);
  }
  return dcg_at_k(got, k) / idcg;
}

struct EvalOptions {
  std::vector<std::size_t> ks{5, 10, 20};
  bool include_train_pois = false;
  bool per_user = false;
};

struct MetricSummary {
  std::string name;  // "Prec@5", "nDCG@10", ...
  std::vector<double> per_run;
  double mean = 0.0;
  double stddev = 0.0;
};

struct UserRow {
  std::size_t run = 0;
  std::string user;
  std::size_t k = 0;
  double precision = 0.0;
  double ndcg = 0.0;
};

struct EvalReport {
  std::vector<std::size_t> ks;
  std::vector<MetricSummary> metrics;  // Prec@k for each k, then nDCG@k for each k
  std::size_t evaluated_users = 0;
  std::size_t skipped_users = 0;
  std::size_t runs = 0;
  std::vector<UserRow> user_rows;

  const MetricSummary& metric(const std::string& name) const {
    for (const auto& m : metrics)
      if (m.name == name) return m;
    throw std::out_of_range("no metric " + name);
  }
};

/// Mean and sample standard deviation (0 for a single value).
inline std::pair<double, double> mean_stddev(std::span<const double> xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

/// Evaluates each run on the test split. Users with no test check-ins are
/// skipped. Candidates exclude training-visited POIs unless
/// include_train_pois is set.
inline EvalReport evaluate(std::span<const io::Checkpoint> runs, const data::SplitDataset& split,
                           const EvalOptions& opt = {}) {
  if (opt.ks.empty()) throw ConfigError("no k values");
  for (std::size_t k : opt.ks)
    if (k < 1) throw ConfigError("k must be >= 1");
  for (const auto& c : runs)
    if (auto why = io::index_mismatch(c, split.test); !why.empty())
      throw DataError("checkpoint does not match dataset: " + why);

  const RelevanceLabels labels = relevance_labels(split.test);
  const auto visited = visited_lists(split.train);
  const std::size_t kmax = *std::max_element(opt.ks.begin(), opt.ks.end());

  EvalReport rep;
  rep.ks = opt.ks;
  rep.runs = runs.size();
  for (const char* kind : {"Prec@", "nDCG@"})
    for (std::size_t k : opt.ks) rep.metrics.push_back({kind + std::to_string(k), {}, 0.0, 0.0});
  const std::size_t nk = opt.ks.size();

  std::vector<Index> users;
  for (Index i = 0; i < split.test.num_users(); ++i) {
    if (labels.users[i].empty())
      ++rep.skipped_users;
    else
      users.push_back(i);
  }
  rep.evaluated_users = users.size();

  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& m = runs[r].model;
    std::vector<double> sums(2 * nk, 0.0);
    for (Index i : users) {
      std::span<const Index> exclude;
      if (!opt.include_train_pois) exclude = visited[i];
      const auto recs = recommend(m, i, kmax, exclude);
      for (std::size_t a = 0; a < nk; ++a) {
        const std::size_t k = opt.ks[a];
        const double p = precision_at_k(recs, labels.users[i], k);
        const double n = ndcg_at_k(recs, labels.users[i], k).value_or(0.0);
        sums[a] += p;
        sums[nk + a] += n;
        if (opt.per_user) rep.user_rows.push_back({r, split.test.user_id(i), k, p, n});
      }
    }
    for (std::size_t a = 0; a < 2 * nk; ++a)
      rep.metrics[a].per_run.push_back(users.empty() ? 0.0 : sums[a] / static_cast<double>(users.size()));
  }
  for (auto& mtr : rep.metrics) std::tie(mtr.mean, mtr.stddev) = mean_stddev(mtr.per_run);
  return rep;
}

}  // namespace jtcr::eval
