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

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jtcr/common.hpp"
#include "jtcr/geo.hpp"
#include "jtcr/interactions.hpp"
#include "jtcr/temporal.hpp"

namespace jtcr::model {

/// User factors U (d x n) and POI factors V (d x m). A user's score for a POI
/// is the dot product of their columns; there are no bias terms.
struct LatentModel {
  Eigen::MatrixXd U;
  Eigen::MatrixXd V;
  double alpha = 0.0;   // geographical weight used in training
  double lambda = 0.0;  // regularization scale used in training

  Eigen::Index dim() const noexcept { return U.rows(); }
  Eigen::Index num_users() const noexcept { return U.cols(); }
  Eigen::Index num_pois() const noexcept { return V.cols(); }

  bool finite() const { return U.allFinite() && V.allFinite(); }
};

inline double score(const LatentModel& m, Index i, Index j) {
  if (i >= m.num_users() || j >= m.num_pois()) throw std::out_of_range("score: index out of range");
  return m.U.col(i).dot(m.V.col(j));
}

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) noexcept {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// The logistic surrogate log(1 + exp(-delta)).
inline double logistic_loss(double delta) noexcept { return softplus(-delta); }

/// 1 / (1 + exp(delta)), the magnitude of the logistic loss slope.
inline double logistic_weight(double delta) noexcept { return 1.0 / (1.0 + std::exp(delta)); }

/// How each user's pair sum is scaled before summing over users.
enum class Normalizer { pair_count, positives, negatives, one };

inline Normalizer parse_normalizer(const std::string& s) {
  if (s == "pair_count") return Normalizer::pair_count;
  if (s == "positives") return Normalizer::positives;
  if (s == "negatives") return Normalizer::negatives;
  if (s == "one") return Normalizer::one;
  throw ConfigError("unknown normalizer '" + s + "'");
}

inline const char* to_string(Normalizer n) {
  switch (n) {
    case Normalizer::pair_count: return "pair_count";
    case Normalizer::positives: return "positives";
    case Normalizer::negatives: return "negatives";
    case Normalizer::one: return "one";
  }
  return "?";
}

struct LossBreakdown {
  double phase1 = 0.0;
  double phase2 = 0.0;
  double theta = 0.0;
};

struct Gradients {
  Eigen::MatrixXd dU;
  Eigen::MatrixXd dV;
};

enum GradientPart : unsigned { kGradU = 1u, kGradV = 2u, kGradBoth = 3u };

/// Replacement negative lists, one per user (e.g. a subsample of L-).
using NegativeLists = std::vector<std::vector<Index>>;

/// Indicator-based violation counts for one user.
struct Heights {
  std::vector<double> height;          // per entry of minus(i)
  std::vector<double> reverse_height;  // per entry of star(i)
};

/// Both phase objectives and their gradients over fixed training data. The
/// store, influence table and regularizer must outlive the objective.
class Objective {
 public:
  static constexpr std::size_t kMaxBlocks = 16;

  Objective(const data::InteractionStore& store, const geo::InfluenceTable& influence,
            const temporal::RegularizerVectors& reg, Normalizer normalizer = Normalizer::pair_count,
            unsigned workers = 1)
      : store_(&store), influence_(&influence), reg_(&reg), normalizer_(normalizer), workers_(workers) {
    if (reg.lambda_u.size() != store.num_users() || reg.lambda_v.size() != store.num_pois())
      throw ConfigError("regularizer size does not match interaction store");
  }

  const data::InteractionStore& store() const noexcept { return *store_; }
  Normalizer normalizer() const noexcept { return normalizer_; }

  /// Sum over users of (1/n_i) * sum over negatives j of H'_i(j)^2.
  double phase1_loss(const LatentModel& m, const NegativeLists* negatives = nullptr) const {
    return run(m, kPhase1, 0u, negatives, nullptr);
  }

  /// Sum over users of (1/n_i) * sum over multi-visit j of log(1 + Pi'_i(j)).
  double phase2_loss(const LatentModel& m) const { return run(m, kPhase2, 0u, nullptr, nullptr); }

  LossBreakdown losses(const LatentModel& m) const {
    LossBreakdown b;
    b.phase1 = phase1_loss(m);
    b.phase2 = phase2_loss(m);
    b.theta = b.phase1 + b.phase2;
    return b;
  }

  /// Sum of Lambda_i/2 |u_i|^2 + Lambda_j/2 |v_j|^2.
  double regularizer_energy(const LatentModel& m) const {
    double e = 0.0;
    for (Eigen::Index i = 0; i < m.U.cols(); ++i) e += 0.5 * reg_->lambda_u[i] * m.U.col(i).squaredNorm();
    for (Eigen::Index j = 0; j < m.V.cols(); ++j) e += 0.5 * reg_->lambda_v[j] * m.V.col(j).squaredNorm();
    return e;
  }

  /// Gradient of phase1_loss + regularizer_energy.
  Gradients phase1_gradients(const LatentModel& m, unsigned parts = kGradBoth,
                             const NegativeLists* negatives = nullptr) const {
    Gradients g = zero_gradients(m, parts);
    run(m, kPhase1, parts, negatives, &g);
    add_regularizer(m, parts, g);
    return g;
  }

  /// Gradient of phase2_loss + regularizer_energy.
  Gradients phase2_gradients(const LatentModel& m, unsigned parts = kGradBoth) const {
    Gradients g = zero_gradients(m, parts);
    run(m, kPhase2, parts, nullptr, &g);
    add_regularizer(m, parts, g);
    return g;
  }

  /// Non-surrogate heights of user i. Ties count as violations.
  Heights exact_heights(const LatentModel& m, Index i) const {
    Heights h;
    const auto u = m.U.col(i);
    auto plus = store_->plus(i), minus = store_->minus(i), star = store_->star(i), single = store_->single(i);
    h.height.reserve(minus.size());
    for (Index j : minus) {
      const double sj = u.dot(m.V.col(j));
      double acc = 0.0;
      for (Index k : plus)
        if (u.dot(m.V.col(k)) <= sj) acc += 1.0 / (*influence_)(k, j);
      h.height.push_back(acc);
    }
    h.reverse_height.reserve(star.size());
    for (Index j : star) {
      const double sj = u.dot(m.V.col(j));
      double cnt = 0.0;
      for (Index k : single)
        if (sj <= u.dot(m.V.col(k))) cnt += 1.0;
      h.reverse_height.push_back(cnt);
    }
    return h;
  }

 private:
  enum Phase { kPhase1, kPhase2 };

  static Gradients zero_gradients(const LatentModel& m, unsigned parts) {
    Gradients g;
    if (parts & kGradU) g.dU = Eigen::MatrixXd::Zero(m.U.rows(), m.U.cols());
    if (parts & kGradV) g.dV = Eigen::MatrixXd::Zero(m.V.rows(), m.V.cols());
    return g;
  }

  void add_regularizer(const LatentModel& m, unsigned parts, Gradients& g) const {
    if (parts & kGradU)
      for (Eigen::Index i = 0; i < m.U.cols(); ++i) g.dU.col(i) += reg_->lambda_u[i] * m.U.col(i);
    if (parts & kGradV)
      for (Eigen::Index j = 0; j < m.V.cols(); ++j) g.dV.col(j) += reg_->lambda_v[j] * m.V.col(j);
  }

  // Per-user scratch: POIs touched and the coefficient e_p such that
  // d(loss_i)/du_i = sum_p e_p v_p and d(loss_i)/dv_p = e_p u_i.
  struct Scratch {
    std::vector<Index> pois;
    std::vector<double> coef;
    std::vector<double> outer_scores;
    std::vector<double> inner_scores;
  };

  double user_phase1(const LatentModel& m, Index i, std::span<const Index> minus, bool want_grad,
                     Scratch& s) const {
    auto plus = store_->plus(i);
    if (plus.empty() || minus.empty()) return 0.0;
    const double norm = phase_norm(normalizer_, minus.size(), plus.size(), kPhase1);
    const auto u = m.U.col(i);
    s.inner_scores.resize(plus.size());
    for (std::size_t a = 0; a < plus.size(); ++a) s.inner_scores[a] = u.dot(m.V.col(plus[a]));
    if (want_grad) prepare(s, plus, minus);
    double loss = 0.0;
    for (std::size_t b = 0; b < minus.size(); ++b) {
      const Index j = minus[b];
      const double sj = u.dot(m.V.col(j));
      double h = 0.0;
      for (std::size_t a = 0; a < plus.size(); ++a)
        h += logistic_loss((s.inner_scores[a] - sj) / (*influence_)(plus[a], j));
      loss += h * h;
      if (!want_grad) continue;
      // d(h^2)/d delta_kj = -2 h w_kj, delta_kj = u.(v_k - v_j) / G_kj
      double row = 0.0;
      for (std::size_t a = 0; a < plus.size(); ++a) {
        const double g = (*influence_)(plus[a], j);
        const double c = 2.0 * h * logistic_weight((s.inner_scores[a] - sj) / g) / (norm * g);
        s.coef[a] -= c;
        row += c;
      }
      s.coef[plus.size() + b] += row;
    }
    return loss / norm;
  }

  double user_phase2(const LatentModel& m, Index i, bool want_grad, Scratch& s) const {
    auto star = store_->star(i), single = store_->single(i);
    if (star.empty() || single.empty()) return 0.0;
    const double norm = phase_norm(normalizer_, star.size(), single.size(), kPhase2);
    const auto u = m.U.col(i);
    s.inner_scores.resize(single.size());
    for (std::size_t a = 0; a < single.size(); ++a) s.inner_scores[a] = u.dot(m.V.col(single[a]));
    if (want_grad) prepare(s, single, star);
    double loss = 0.0;
    for (std::size_t b = 0; b < star.size(); ++b) {
      const double sj = u.dot(m.V.col(star[b]));
      double p = 0.0;
      for (std::size_t a = 0; a < single.size(); ++a) p += logistic_loss(sj - s.inner_scores[a]);
      loss += std::log1p(p);
      if (!want_grad) continue;
      // d log(1 + p) / d delta_jk = -w_jk / (1 + p), delta_jk = u.(v_j - v_k)
      double row = 0.0;
      for (std::size_t a = 0; a < single.size(); ++a) {
        const double c = logistic_weight(sj - s.inner_scores[a]) / (norm * (1.0 + p));
        s.coef[a] += c;
        row += c;
      }
      s.coef[single.size() + b] -= row;
    }
    return loss / norm;
  }

  static void prepare(Scratch& s, std::span<const Index> inner, std::span<const Index> outer) {
    s.pois.assign(inner.begin(), inner.end());
    s.pois.insert(s.pois.end(), outer.begin(), outer.end());
    s.coef.assign(s.pois.size(), 0.0);
  }

  // positives: the preferred side (L+ in phase 1, L* in phase 2);
  // negatives: the other side (L- in phase 1, L1+ in phase 2).
  static double phase_norm(Normalizer n, std::size_t outer, std::size_t inner, Phase phase) {
    const std::size_t preferred = phase == kPhase1 ? inner : outer;
    const std::size_t other = phase == kPhase1 ? outer : inner;
    switch (n) {
      case Normalizer::pair_count: return static_cast<double>(outer) * static_cast<double>(inner);
      case Normalizer::positives: return static_cast<double>(preferred);
      case Normalizer::negatives: return static_cast<double>(other);
      case Normalizer::one: return 1.0;
    }
    return 1.0;
  }

  // Users are cut into at most kMaxBlocks contiguous blocks. Each block sums
  // its own loss and V-gradient; blocks are then reduced in order, so the
  // result does not depend on the worker count.
  double run(const LatentModel& m, Phase phase, unsigned parts, const NegativeLists* negatives,
             Gradients* g) const {
    const std::size_t n = store_->num_users();
    if (static_cast<std::size_t>(m.U.cols()) != n || static_cast<std::size_t>(m.V.cols()) != store_->num_pois())
      throw ConfigError("model shape does not match interaction store");
    if (negatives && negatives->size() != n) throw ConfigError("negative lists size mismatch");
    if (n == 0) return 0.0;
    const std::size_t blocks = std::min(kMaxBlocks, n);
    const bool want_grad = g != nullptr && parts != 0u;
    const bool want_v = want_grad && (parts & kGradV);
    std::vector<double> block_loss(blocks, 0.0);
    std::vector<Eigen::MatrixXd> block_dv(want_v && blocks > 1 ? blocks : 0);

    parallel_blocks(blocks, workers_, [&](std::size_t b) {
      const std::size_t lo = n * b / blocks, hi = n * (b + 1) / blocks;
      Eigen::MatrixXd* dv = nullptr;
      if (want_v) {
        if (blocks > 1) {
          block_dv[b] = Eigen::MatrixXd::Zero(m.V.rows(), m.V.cols());
          dv = &block_dv[b];
        } else {
          dv = &g->dV;
        }
      }
      Scratch s;
      double acc = 0.0;
      for (std::size_t ii = lo; ii < hi; ++ii) {
        const auto i = static_cast<Index>(ii);
        s.pois.clear();
        const double li = phase == kPhase1
                              ? user_phase1(m, i, negatives ? std::span<const Index>((*negatives)[i]) : store_->minus(i),
                                            want_grad, s)
                              : user_phase2(m, i, want_grad, s);
        acc += li;
        if (!want_grad || s.pois.empty()) continue;
        if (parts & kGradU) {
          auto du = g->dU.col(i);
          for (std::size_t p = 0; p < s.pois.size(); ++p) du += s.coef[p] * m.V.col(s.pois[p]);
        }
        if (dv) {
          const auto u = m.U.col(i);
          for (std::size_t p = 0; p < s.pois.size(); ++p) dv->col(s.pois[p]) += s.coef[p] * u;
        }
      }
      block_loss[b] = acc;
    });

    if (want_v && blocks > 1)
      for (const auto& dv : block_dv) g->dV += dv;
    double total = 0.0;
    for (double l : block_loss) total += l;
    return total;
  }

  const data::InteractionStore* store_;
  const geo::InfluenceTable* influence_;
  const temporal::RegularizerVectors* reg_;
  Normalizer normalizer_;
  unsigned workers_;
};

}  // namespace jtcr::model
