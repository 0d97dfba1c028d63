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

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using namespace jtcr;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

template <class T>
std::vector<T> parse_list(const std::string& s) {
  std::vector<T> out;
  for (const auto& item : split_list(s)) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) throw jtcr::ConfigError("bad list value '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-phase collaborative ranking for POI recommendation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string input, out_dir, format = "csv";
  std::uint64_t seed = 42;
  std::size_t min_count = 5;
  double radius_km = 0.0;
  app.add_option("--input", input, "Check-in file: user,poi,timestamp,lat,lon[,category]");
  app.add_option("--out-dir", out_dir, "Directory for output files");
  auto* seed_opt = app.add_option("--seed", seed, "Base random seed");
  app.add_option("--format", format, "Input format")->check(CLI::IsMember({"csv", "tsv"}));
  app.add_option("--min-count", min_count, "Minimum check-ins per user and POI")->check(CLI::PositiveNumber);
  auto* radius_opt = app.add_option("--radius-km", radius_km, "Use POIs within this radius of visited ones as negatives")
                         ->check(CLI::PositiveNumber);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Dataset statistics and temporal analysis");
  temporal::AnalysisOptions aopt;
  analyze->add_option("--top-categories", aopt.top_categories, "Categories in the popularity table");
  analyze->add_option("--extremes", aopt.extremes, "Users/categories listed at each variance extreme");
  analyze->add_option("--min-user-checkins", aopt.most_variant_min_checkins,
                      "Minimum check-ins for the most-variant user list");

  // train
  auto* trn = app.add_subcommand("train", "Train models");
  std::string config_path, mode, normalizer, seeds_str, grid_d, grid_alpha, grid_lambda;
  int d = 0, max_iter = 0, runs = 1;
  double gamma = 0, lambda = 0, alpha = 0, epsilon = 0;
  std::size_t neg_samples = 0;
  bool timing = false;
  trn->add_option("--config", config_path, "JSON config file (flags take precedence)");
  auto* o_d = trn->add_option("--d", d, "Latent dimension");
  auto* o_gamma = trn->add_option("--gamma", gamma, "Learning rate");
  auto* o_lambda = trn->add_option("--lambda", lambda, "Regularization scale");
  auto* o_alpha = trn->add_option("--alpha", alpha, "Geographical influence weight");
  auto* o_eps = trn->add_option("--epsilon", epsilon, "Convergence tolerance on |theta change|");
  auto* o_iter = trn->add_option("--max-iter", max_iter, "Iteration cap");
  auto* o_mode = trn->add_option("--mode", mode, "joint|phase1|novar|nogeo")
                     ->check(CLI::IsMember({"joint", "phase1", "novar", "nogeo"}));
  auto* o_norm = trn->add_option("--normalizer", normalizer, "pair_count|positives|negatives|one")
                     ->check(CLI::IsMember({"pair_count", "positives", "negatives", "one"}));
  auto* o_neg = trn->add_option("--neg-samples", neg_samples, "Negatives sampled per user per iteration");
  auto* o_runs = trn->add_option("--runs", runs, "Independent runs");
  trn->add_option("--seeds", seeds_str, "Comma-separated seed per run");
  trn->add_option("--grid-d", grid_d, "Grid search over d (comma list)");
  trn->add_option("--grid-alpha", grid_alpha, "Grid search over alpha (comma list)");
  trn->add_option("--grid-lambda", grid_lambda, "Grid search over lambda (comma list)");
  trn->add_flag("--timing", timing, "Record wall time per iteration in trace.csv");

  // evaluate
  auto* evl = app.add_subcommand("evaluate", "Evaluate checkpoints on the test split");
  std::vector<std::string> checkpoints;
  std::string ks = "5,10,20";
  bool include_train = false, per_user = false;
  evl->add_option("--checkpoint", checkpoints, "Checkpoint file (repeatable)")->required();
  evl->add_option("--k", ks, "Comma-separated list sizes");
  evl->add_flag("--include-train-pois", include_train, "Keep training-visited POIs as candidates");
  evl->add_flag("--per-user", per_user, "Write per_user.csv");

  // recommend
  auto* rec = app.add_subcommand("recommend", "Top-k POIs for users");
  std::string rec_ckpt;
  std::vector<std::string> rec_users;
  std::size_t rec_k = 10;
  rec->add_option("--checkpoint", rec_ckpt, "Checkpoint file")->required();
  rec->add_option("--user", rec_users, "User id (repeatable)")->required();
  rec->add_option("--k", rec_k, "List size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : cli::kUsage;
  }

  try {
    cli::DataOptions data;
    data.input = input;
    data.format = format == "tsv" ? data::Format::tsv : data::Format::csv;
    data.min_count = min_count;
    if (radius_opt->count()) data.radius_km = radius_km;

    auto need = [&](bool ok, const char* what) {
      if (!ok) throw jtcr::ConfigError(std::string("missing ") + what);
    };

    if (analyze->parsed()) {
      need(!input.empty(), "--input");
      need(!out_dir.empty(), "--out-dir");
      return cli::cmd_analyze({data, out_dir, aopt}, std::cout, std::cerr);
    }

    if (trn->parsed()) {
      need(!input.empty(), "--input");
      need(!out_dir.empty(), "--out-dir");
      cli::TrainOptions o;
      o.data = data;
      o.out_dir = out_dir;
      o.timing = timing;
      nlohmann::json file = nlohmann::json::object();
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw jtcr::ConfigError("cannot open config '" + config_path + "'");
        file = nlohmann::json::parse(in);
        o.cfg = cli::apply_config_json(o.cfg, file);
        if (file.contains("runs")) o.runs = file.at("runs").get<int>();
      }
      if (seed_opt->count()) o.cfg.seed = seed;
      if (o_d->count()) o.cfg.d = d;
      if (o_gamma->count()) o.cfg.gamma = gamma;
      if (o_lambda->count()) o.cfg.lambda = lambda;
      if (o_alpha->count()) o.cfg.alpha = alpha;
      if (o_eps->count()) o.cfg.epsilon = epsilon;
      if (o_iter->count()) o.cfg.max_iter = max_iter;
      if (o_mode->count()) o.cfg.mode = train::parse_mode(mode);
      if (o_norm->count()) o.cfg.normalizer = model::parse_normalizer(normalizer);
      if (o_neg->count()) o.cfg.negative_samples = neg_samples;
      if (o_runs->count()) o.runs = runs;
      if (!seeds_str.empty()) o.seeds = parse_list<std::uint64_t>(seeds_str);

      if (file.contains("grid"))
        for (const auto& g : file.at("grid")) o.grid.push_back(cli::apply_config_json(o.cfg, g));
      if (!grid_d.empty() || !grid_alpha.empty() || !grid_lambda.empty()) {
        auto ds = grid_d.empty() ? std::vector<int>{o.cfg.d} : parse_list<int>(grid_d);
        auto as = grid_alpha.empty() ? std::vector<double>{o.cfg.alpha} : parse_list<double>(grid_alpha);
        auto ls = grid_lambda.empty() ? std::vector<double>{o.cfg.lambda} : parse_list<double>(grid_lambda);
        o.grid.clear();
        for (int dv : ds)
          for (double av : as)
            for (double lv : ls) {
              auto c = o.cfg;
              c.d = dv;
              c.alpha = av;
              c.lambda = lv;
              o.grid.push_back(c);
            }
      }
      return cli::cmd_train(o, std::cout, std::cerr);
    }

    if (evl->parsed()) {
      need(!input.empty(), "--input");
      cli::EvaluateOptions o;
      o.data = data;
      o.out_dir = out_dir;
      o.checkpoints = checkpoints;
      o.eval.ks = parse_list<std::size_t>(ks);
      o.eval.include_train_pois = include_train;
      o.eval.per_user = per_user;
      return cli::cmd_evaluate(o, std::cout, std::cerr);
    }

    if (rec->parsed()) {
      cli::RecommendOptions o;
      o.checkpoint = rec_ckpt;
      o.users = rec_users;
      o.k = rec_k;
      if (!input.empty()) o.data = data;
      return cli::cmd_recommend(o, std::cout, std::cerr);
    }
  } catch (const jtcr::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: bad config: " << e.what() << "\n";
    return cli::kUsage;
  }
  return cli::kUsage;
}
