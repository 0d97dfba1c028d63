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

#include <span>
#include <vector>

#include "jtcr/checkpoint.hpp"
#include "jtcr/data.hpp"
#include "jtcr/eval.hpp"
#include "jtcr/geo.hpp"
#include "jtcr/interactions.hpp"
#include "jtcr/temporal.hpp"
#include "jtcr/train.hpp"

namespace jtcr {

/// Training inputs derived from one split.
struct TrainingData {
  data::InteractionStore store;
  geo::GeoIndex geo;
};

inline TrainingData training_data(const data::SplitDataset& split,
                                  const data::CandidateUniverse& universe = data::AllPois{}) {
  return {data::build_interactions(split.train, universe), data::geo_index(split.train)};
}

/// Trains one configuration on the training split. The regularizer is
/// derived from training check-ins only.
inline train::TrainResult train_on_split(const train::TrainConfig& cfg, const data::SplitDataset& split,
                                         const TrainingData& td, unsigned workers = 1) {
  const auto reg = temporal::regularizer_vectors(split.train, cfg.lambda);
  return train::train(cfg, td.store, td.geo, reg, workers);
}

/// Scores a model with nDCG@k on the validation split.
inline double validation_ndcg(const model::LatentModel& m, const data::SplitDataset& split, std::size_t k = 5) {
  data::SplitDataset view{split.train, split.train, split.validation, split.ratios};
  const io::Checkpoint c = io::make_checkpoint(m, split.train);
  eval::EvalOptions opt;
  opt.ks = {k};
  return eval::evaluate(std::span<const io::Checkpoint>(&c, 1), view, opt).metrics.back().mean;
}

struct Selection {
  std::size_t index = 0;
  train::TrainConfig config;
  std::vector<double> scores;  // validation nDCG@5 per grid entry
};

/// Trains every grid entry and keeps the best validation nDCG@5; the
/// earliest entry wins ties.
inline Selection select_hyperparameters(std::span<const train::TrainConfig> grid, const data::SplitDataset& split,
                                        const data::CandidateUniverse& universe = data::AllPois{},
                                        unsigned workers = 1) {
  if (grid.empty()) throw ConfigError("empty hyperparameter grid");
  const TrainingData td = training_data(split, universe);
  Selection sel;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto res = train_on_split(grid[g], split, td, workers);
    sel.scores.push_back(validation_ndcg(res.model, split));
    if (sel.scores[g] > sel.scores[sel.index]) sel.index = g;
  }
  sel.config = grid[sel.index];
  return sel;
}

}  // namespace jtcr
