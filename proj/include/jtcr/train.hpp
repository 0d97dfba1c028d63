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
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "jtcr/common.hpp"
#include "jtcr/geo.hpp"
#include "jtcr/interactions.hpp"
#include "jtcr/model.hpp"
#include "jtcr/temporal.hpp"

namespace jtcr::train {

enum class Mode { joint, phase1_only, no_var, no_geo };

inline Mode parse_mode(const std::string& s) {
  if (s == "joint") return Mode::joint;
  if (s == "phase1" || s == "phase1_only") return Mode::phase1_only;
  if (s == "novar" || s == "no_var") return Mode::no_var;
  if (s == "nogeo" || s == "no_geo") return Mode::no_geo;
  throw ConfigError("unknown mode '" + s + "'");
}

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::joint: return "joint";
    case Mode::phase1_only: return "phase1";
    case Mode::no_var: return "novar";
    case Mode::no_geo: return "nogeo";
  }
  return "?";
}

struct TrainConfig {
  int d = 80;
  double gamma = 1e-4;
  double lambda = 1e-4;
  double alpha = 0.5;
  int max_iter = 500;
  double epsilon = 1e-3;
  std::uint64_t seed = 42;
  Mode mode = Mode::joint;
  model::Normalizer normalizer = model::Normalizer::pair_count;
  std::optional<std::size_t> negative_samples;  // per user, redrawn every iteration
  double init_stddev = 0.01;

  void validate() const {
    if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
    if (d < 1) throw ConfigError("d must be >= 1");
    if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    if (negative_samples && *negative_samples == 0) throw ConfigError("negative sample size must be >= 1");
    if (!(init_stddev > 0.0)) throw ConfigError("init_stddev must be > 0");
  }

  /// The alpha actually used, after the ablation mode.
  double effective_alpha() const { return mode == Mode::no_geo ? 0.0 : alpha; }
};

struct TraceRow {
  int t = 0;
  double theta = 0.0;
  double phase1 = 0.0;
  double phase2 = 0.0;
  double millis = 0.0;  // wall time of the iteration
};

struct TrainTrace {
  double initial_theta = 0.0;
  std::vector<TraceRow> rows;
  bool converged = false;
  int iterations = 0;
};

struct TrainResult {
  model::LatentModel model;
  TrainTrace trace;
};

/// Gaussian(0, init_stddev) entries, U column by column then V. Same seed,
/// same bits.
inline model::LatentModel init_model(const TrainConfig& cfg, std::size_t n, std::size_t m) {
  if (cfg.d < 1) throw ConfigError("d must be >= 1");
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> dist(0.0, cfg.init_stddev);
  model::LatentModel lm;
  lm.U.resize(cfg.d, static_cast<Eigen::Index>(n));
  lm.V.resize(cfg.d, static_cast<Eigen::Index>(m));
  for (Eigen::Index k = 0; k < lm.U.size(); ++k) lm.U.data()[k] = dist(rng);
  for (Eigen::Index k = 0; k < lm.V.size(); ++k) lm.V.data()[k] = dist(rng);
  lm.alpha = cfg.effective_alpha();
  lm.lambda = cfg.lambda;
  return lm;
}

/// Draws min(size, |L-|) negatives per user without replacement, sorted.
inline model::NegativeLists sample_negatives(const data::InteractionStore& store, std::size_t size,
                                             std::mt19937_64& rng) {
  model::NegativeLists out(store.num_users());
  std::vector<Index> pool;
  for (Index i = 0; i < store.num_users(); ++i) {
    auto minus = store.minus(i);
    if (minus.size() <= size) {
      out[i].assign(minus.begin(), minus.end());
      continue;
    }
    pool.assign(minus.begin(), minus.end());
    for (std::size_t a = 0; a < size; ++a) {
      std::uniform_int_distribution<std::size_t> pick(a, pool.size() - 1);
      std::swap(pool[a], pool[pick(rng)]);
    }
    out[i].assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

/// Observer invoked after each iteration; return false to stop early.
using IterationCallback = std::function<bool(const TraceRow&, const model::LatentModel&)>;

/// Alternating full-batch gradient descent over both phases. Each iteration
/// updates U then V on the phase-1 objective, then U then V on the phase-2
/// objective (skipped in phase1_only mode), and recomputes theta = R + R_pi.
/// Stops once |theta_new - theta_old| <= epsilon or after max_iter iterations.
inline TrainResult train(const TrainConfig& cfg, const data::InteractionStore& store, const geo::GeoIndex& geo,
                         const temporal::RegularizerVectors& reg, unsigned workers = 1,
                         const IterationCallback& on_iteration = {}) {
  cfg.validate();
  if (geo.size() != store.num_pois()) throw ConfigError("geo index size does not match interaction store");
  if (reg.lambda != cfg.lambda) throw ConfigError("regularizer lambda does not match config");

  const temporal::RegularizerVectors reg_eff =
      cfg.mode == Mode::no_var ? temporal::RegularizerVectors::uniform(store.num_users(), store.num_pois(), cfg.lambda)
                               : reg;
  const geo::InfluenceTable influence(geo, cfg.effective_alpha());
  const model::Objective objective(store, influence, reg_eff, cfg.normalizer, workers);

  TrainResult res;
  auto& lm = res.model;
  lm = init_model(cfg, store.num_users(), store.num_pois());

  std::seed_seq neg_seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                        std::uint32_t{0x6e656773}};
  std::mt19937_64 neg_rng(neg_seq);

  double theta_next = objective.losses(lm).theta;
  double theta = theta_next / 2;
  res.trace.initial_theta = theta_next;
  int t = 0;
  while (std::abs(theta_next - theta) > cfg.epsilon && t < cfg.max_iter) {
    ++t;
    const auto start = std::chrono::steady_clock::now();

    std::optional<model::NegativeLists> sample;
    if (cfg.negative_samples) sample = sample_negatives(store, *cfg.negative_samples, neg_rng);
    const model::NegativeLists* neg = sample ? &*sample : nullptr;

    lm.U -= cfg.gamma * objective.phase1_gradients(lm, model::kGradU, neg).dU;
    lm.V -= cfg.gamma * objective.phase1_gradients(lm, model::kGradV, neg).dV;
    if (cfg.mode != Mode::phase1_only) {
      lm.U -= cfg.gamma * objective.phase2_gradients(lm, model::kGradU).dU;
      lm.V -= cfg.gamma * objective.phase2_gradients(lm, model::kGradV).dV;
    }

    const model::LossBreakdown b = objective.losses(lm);
    theta = theta_next;
    theta_next = b.theta;
    const auto stop = std::chrono::steady_clock::now();
    TraceRow row{t, b.theta, b.phase1, b.phase2,
                 std::chrono::duration<double, std::milli>(stop - start).count()};
    res.trace.rows.push_back(row);
    if (!std::isfinite(b.theta) || !lm.finite())
      throw DivergenceError(t, "objective became non-finite at iteration " + std::to_string(t));
    if (on_iteration && !on_iteration(row, lm)) break;
  }
  res.trace.iterations = t;
  res.trace.converged = std::abs(theta_next - theta) <= cfg.epsilon;
  return res;
}

}  // namespace jtcr::train
