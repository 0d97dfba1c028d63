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

// Subcommand implementations for the jtcr command-line tool. Each command
// takes fully resolved options and returns a process exit code; argument
// parsing lives in jtcr.cpp.

#pragma once

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "jtcr/analysis.hpp"
#include "jtcr/checkpoint.hpp"
#include "jtcr/data.hpp"
#include "jtcr/eval.hpp"
#include "jtcr/interactions.hpp"
#include "jtcr/pipeline.hpp"
#include "jtcr/train.hpp"

namespace jtcr::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kDivergence = 3 };

struct DataOptions {
  std::string input;
  data::Format format = data::Format::csv;
  std::size_t min_count = 5;
  std::optional<double> radius_km;  // neighborhood candidates instead of all POIs

  data::CandidateUniverse universe() const {
    if (radius_km) return data::NeighborhoodRadius{*radius_km};
    return data::AllPois{};
  }
};

struct AnalyzeOptions {
  DataOptions data;
  fs::path out_dir;
  temporal::AnalysisOptions analysis;
};

struct TrainOptions {
  DataOptions data;
  fs::path out_dir;
  train::TrainConfig cfg;
  int runs = 1;
  std::vector<std::uint64_t> seeds;  // explicit per-run seeds; else seed + r
  std::vector<train::TrainConfig> grid;
  bool timing = false;
};

struct EvaluateOptions {
  DataOptions data;
  fs::path out_dir;  // empty: print only
  std::vector<std::string> checkpoints;
  eval::EvalOptions eval;
};

struct RecommendOptions {
  std::string checkpoint;
  std::vector<std::string> users;
  std::size_t k = 10;
  std::optional<DataOptions> data;  // when set, training POIs are excluded
};

// ---------------------------------------------------------------------------
// helpers

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

inline std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline data::Dataset load_filtered(const DataOptions& o) {
  data::Dataset ds = data::filter_min_activity(data::parse_checkins(o.input, o.format), o.min_count);
  if (ds.empty()) throw DataError("empty dataset after filtering");
  return ds;
}

inline json config_json(const train::TrainConfig& c) {
  json j = {{"d", c.d},
            {"gamma", c.gamma},
            {"lambda", c.lambda},
            {"alpha", c.alpha},
            {"epsilon", c.epsilon},
            {"max_iter", c.max_iter},
            {"seed", c.seed},
            {"mode", train::to_string(c.mode)},
            {"normalizer", model::to_string(c.normalizer)},
            {"init_stddev", c.init_stddev}};
  j["neg_samples"] = c.negative_samples ? json(*c.negative_samples) : json(nullptr);
  return j;
}

/// Applies the keys present in `j` on top of `c`.
inline train::TrainConfig apply_config_json(train::TrainConfig c, const json& j) {
  if (j.contains("d")) c.d = j.at("d").get<int>();
  if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
  if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
  if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
  if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
  if (j.contains("max_iter")) c.max_iter = j.at("max_iter").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("mode")) c.mode = train::parse_mode(j.at("mode").get<std::string>());
  if (j.contains("normalizer")) c.normalizer = model::parse_normalizer(j.at("normalizer").get<std::string>());
  if (j.contains("init_stddev")) c.init_stddev = j.at("init_stddev").get<double>();
  if (j.contains("neg_samples")) {
    if (j.at("neg_samples").is_null())
      c.negative_samples.reset();
    else
      c.negative_samples = j.at("neg_samples").get<std::size_t>();
  }
  return c;
}

/// trace.csv: t,theta,phase1,phase2,millis. millis is left empty unless
/// timing is requested, so that repeated runs produce identical files.
inline std::string trace_csv(const train::TrainTrace& tr, bool timing) {
  std::string out = "t,theta,phase1,phase2,millis\n";
  for (const auto& r : tr.rows) {
    out += std::to_string(r.t) + "," + fmt_double(r.theta) + "," + fmt_double(r.phase1) + "," +
           fmt_double(r.phase2) + "," + (timing ? fmt_double(r.millis) : std::string()) + "\n";
  }
  return out;
}

inline void append_manifest(const fs::path& out_dir, const json& entry) {
  fs::create_directories(out_dir);
  std::ofstream out(out_dir / "manifest.jsonl", std::ios::app);
  if (!out) throw DataError("cannot append manifest");
  out << entry.dump() << "\n";
}

// ---------------------------------------------------------------------------
// analyze

inline std::string summary_text(const data::DatasetSummary& s) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "# of users %zu\n# of POIs %zu\n# of check-ins %zu\nAvg. POIs per user %.3f\n"
                "Avg. users per POI %.3f\nMultiple check-ins %.2f%%\ndensity %.4f\n",
                s.users, s.pois, s.checkins, s.avg_pois_per_user, s.avg_users_per_poi,
                100.0 * s.multiple_checkin_share, s.density);
  return buf;
}

inline json summary_json(const data::DatasetSummary& s) {
  return {{"users", s.users},
          {"pois", s.pois},
          {"checkins", s.checkins},
          {"avg_pois_per_user", s.avg_pois_per_user},
          {"avg_users_per_poi", s.avg_users_per_poi},
          {"multiple_checkin_share", s.multiple_checkin_share},
          {"density", s.density}};
}

/// Output files, all CSV with a header row:
///   monthly_checkins.csv     month,checkins
///   category_popularity.csv  category,month,checkins,share
///   variance_extremes.csv    kind,extreme,rank,owner,total,variance,month,share
///   user_checkins.csv        user,checkins,single_checkins,multiple_checkins,multiple_share
/// plus correlations.json and summary.json.
inline int cmd_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err) {
  data::Dataset ds;
  try {
    ds = load_filtered(o.data);
  } catch (const std::exception& e) {
    err << "analyze: " << e.what() << "\n";
    return kDataError;
  }
  const auto rep = temporal::analysis_report(ds, o.analysis);

  std::string monthly = "month,checkins\n";
  for (const auto& m : rep.monthly_totals) monthly += m.month + "," + std::to_string(m.checkins) + "\n";

  std::string cats = "category,month,checkins,share\n";
  for (const auto& c : rep.category_popularity)
    cats += csv_field(c.category) + "," + c.month + "," + std::to_string(c.checkins) + "," + fmt_double(c.share) + "\n";

  std::string extremes = "kind,extreme,rank,owner,total,variance,month,share\n";
  for (const auto& v : rep.variance_extremes)
    for (std::size_t b = 0; b < v.series.shares.size(); ++b)
      extremes += v.kind + "," + v.extreme + "," + std::to_string(v.rank) + "," + csv_field(v.owner) + "," +
                  std::to_string(v.total) + "," + fmt_double(v.variance) + "," +
                  temporal::month_label(v.series.range.first + static_cast<int>(b)) + "," +
                  fmt_double(v.series.shares[b]) + "\n";

  std::string users = "user,checkins,single_checkins,multiple_checkins,multiple_share\n";
  for (const auto& u : rep.repeat_stats)
    users += csv_field(u.user) + "," + std::to_string(u.checkins) + "," + std::to_string(u.single_checkins) + "," +
             std::to_string(u.multiple_checkins) + "," + fmt_double(u.multiple_share) + "\n";

  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  const json corr = {{"user_variance_vs_checkins", opt(rep.correlations.user_variance_vs_checkins)},
                     {"category_variance_vs_popularity", opt(rep.correlations.category_variance_vs_popularity)},
                     {"user_checkins_vs_multiple_share", opt(rep.correlations.user_checkins_vs_multiple_share)}};

  try {
    io::write_file_atomic(o.out_dir / "monthly_checkins.csv", monthly);
    io::write_file_atomic(o.out_dir / "category_popularity.csv", cats);
    io::write_file_atomic(o.out_dir / "variance_extremes.csv", extremes);
    io::write_file_atomic(o.out_dir / "user_checkins.csv", users);
    io::write_file_atomic(o.out_dir / "correlations.json", corr.dump(2) + "\n");
    io::write_file_atomic(o.out_dir / "summary.json", summary_json(rep.summary).dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "analyze: " << e.what() << "\n";
    return kDataError;
  }
  out << summary_text(rep.summary);
  auto show = [&](const char* name, const std::optional<double>& v) {
    out << name << " " << (v ? fmt_double(*v) : std::string("undefined")) << "\n";
  };
  show("Spearman user variance vs check-ins", rep.correlations.user_variance_vs_checkins);
  show("Spearman category variance vs popularity", rep.correlations.category_variance_vs_popularity);
  show("Spearman user check-ins vs multiple share", rep.correlations.user_checkins_vs_multiple_share);
  return kOk;
}

// ---------------------------------------------------------------------------
// train

/// Trains `runs` models (or the best grid entry, when a grid is given) and
/// writes run_<r>/checkpoint.bin and run_<r>/trace.csv under out_dir. Run r
/// uses seeds[r] if given, else seed + r.
inline int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  const std::string started = utc_now();
  if (o.runs < 1) {
    err << "train: --runs must be >= 1\n";
    return kUsage;
  }
  if (!o.seeds.empty() && o.seeds.size() != static_cast<std::size_t>(o.runs)) {
    err << "train: expected " << o.runs << " seeds, got " << o.seeds.size() << "\n";
    return kUsage;
  }
  try {
    o.cfg.validate();
    for (const auto& g : o.grid) g.validate();
  } catch (const ConfigError& e) {
    err << "train: " << e.what() << "\n";
    return kUsage;
  }

  const unsigned workers = worker_count();
  json manifest = {{"command", "train"}, {"tool_version", kToolVersion}, {"started", started}};
  try {
    const std::string raw = io::read_file(o.data.input);
    manifest["input"] = {{"path", o.data.input}, {"sha256", sha256_hex(raw)}};
    std::istringstream in(raw);
    data::Dataset ds = data::filter_min_activity(data::parse_checkins(in, o.data.format), o.data.min_count);
    if (ds.empty()) throw DataError("empty dataset after filtering");
    const auto split = data::chronological_split(ds);
    const TrainingData td = training_data(split, o.data.universe());

    train::TrainConfig cfg = o.cfg;
    if (!o.grid.empty()) {
      const Selection sel = select_hyperparameters(o.grid, split, o.data.universe(), workers);
      json scores = json::array();
      for (std::size_t g = 0; g < o.grid.size(); ++g) {
        scores.push_back({{"config", config_json(o.grid[g])}, {"validation_ndcg5", sel.scores[g]}});
        out << "grid " << g << " validation nDCG@5 " << fmt_double(sel.scores[g]) << "\n";
      }
      manifest["grid"] = scores;
      manifest["selected"] = sel.index;
      cfg = sel.config;
      out << "selected grid entry " << sel.index << "\n";
    }
    manifest["config"] = config_json(cfg);
    manifest["data"] = {{"format", o.data.format == data::Format::csv ? "csv" : "tsv"},
                        {"min_count", o.data.min_count},
                        {"radius_km", o.data.radius_km ? json(*o.data.radius_km) : json(nullptr)}};

    json runs = json::array();
    for (int r = 0; r < o.runs; ++r) {
      train::TrainConfig rc = cfg;
      rc.seed = o.seeds.empty() ? cfg.seed + static_cast<std::uint64_t>(r) : o.seeds[r];
      train::TrainResult res;
      try {
        res = train_on_split(rc, split, td, workers);
      } catch (const DivergenceError& e) {
        err << "train: run " << r << ": divergence at iteration " << e.iteration() << ": " << e.what() << "\n";
        return kDivergence;
      }
      const fs::path dir = o.out_dir / ("run_" + std::to_string(r));
      const std::string ckpt = io::serialize(io::make_checkpoint(res.model, split.train));
      io::write_file_atomic(dir / "checkpoint.bin", ckpt);
      io::write_file_atomic(dir / "trace.csv", trace_csv(res.trace, o.timing));
      out << "run " << r << " seed " << rc.seed << " iterations " << res.trace.iterations
          << (res.trace.converged ? " converged" : " max_iter reached") << " theta "
          << fmt_double(res.trace.rows.empty() ? res.trace.initial_theta : res.trace.rows.back().theta) << "\n";
      runs.push_back({{"run", r},
                      {"seed", rc.seed},
                      {"iterations", res.trace.iterations},
                      {"converged", res.trace.converged},
                      {"checkpoint", (dir / "checkpoint.bin").string()},
                      {"checkpoint_sha256", sha256_hex(ckpt)},
                      {"trace", (dir / "trace.csv").string()}});
    }
    manifest["runs"] = runs;
    manifest["finished"] = utc_now();
    append_manifest(o.out_dir, manifest);
  } catch (const ConfigError& e) {
    err << "train: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "train: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// evaluate

inline json report_json(const eval::EvalReport& r, const std::vector<std::string>& digests) {
  json metrics = json::object();
  for (const auto& m : r.metrics) metrics[m.name] = {{"mean", m.mean}, {"stddev", m.stddev}, {"runs", m.per_run}};
  return {{"ks", r.ks},
          {"metrics", metrics},
          {"evaluated_users", r.evaluated_users},
          {"skipped_users", r.skipped_users},
          {"runs", r.runs},
          {"checkpoint_sha256", digests}};
}

inline std::string report_text(const eval::EvalReport& r) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "metric" << std::right << std::setw(12) << "mean" << std::setw(12) << "stddev"
     << "\n";
  os << std::fixed << std::setprecision(4);
  for (const auto& m : r.metrics)
    os << std::left << std::setw(10) << m.name << std::right << std::setw(12) << m.mean << std::setw(12) << m.stddev
       << "\n";
  os << "users evaluated " << r.evaluated_users << ", skipped " << r.skipped_users << ", runs " << r.runs << "\n";
  return os.str();
}

inline std::string per_user_csv(const eval::EvalReport& r) {
  std::string out = "run,user,k,precision,ndcg\n";
  for (const auto& u : r.user_rows)
    out += std::to_string(u.run) + "," + csv_field(u.user) + "," + std::to_string(u.k) + "," +
           fmt_double(u.precision) + "," + fmt_double(u.ndcg) + "\n";
  return out;
}

/// Writes report.json, report.txt and (with per_user) per_user.csv when an
/// output directory is given.
inline int cmd_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream& err) {
  if (o.checkpoints.empty()) {
    err << "evaluate: no checkpoints given\n";
    return kUsage;
  }
  try {
    const auto split = data::chronological_split(load_filtered(o.data));
    std::vector<io::Checkpoint> runs;
    std::vector<std::string> digests;
    for (const auto& path : o.checkpoints) {
      const std::string bytes = io::read_file(path);
      runs.push_back(io::deserialize(bytes));
      digests.push_back(sha256_hex(bytes));
      if (auto why = io::index_mismatch(runs.back(), split.test); !why.empty()) {
        err << "evaluate: checkpoint '" << path << "' is incompatible with the input: " << why << "\n";
        return kDataError;
      }
    }
    const auto rep = eval::evaluate(runs, split, o.eval);
    const std::string text = report_text(rep);
    if (!o.out_dir.empty()) {
      io::write_file_atomic(o.out_dir / "report.json", report_json(rep, digests).dump(2) + "\n");
      io::write_file_atomic(o.out_dir / "report.txt", text);
      if (o.eval.per_user) io::write_file_atomic(o.out_dir / "per_user.csv", per_user_csv(rep));
    }
    out << text;
  } catch (const ConfigError& e) {
    err << "evaluate: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "evaluate: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// recommend

/// Prints "user<TAB>rank<TAB>poi<TAB>score" rows. Unknown users are reported
/// and skipped; fails only when no user could be served.
inline int cmd_recommend(const RecommendOptions& o, std::ostream& out, std::ostream& err) {
  if (o.k < 1) {
    err << "recommend: k must be >= 1\n";
    return kUsage;
  }
  try {
    const io::Checkpoint c = io::load_checkpoint(o.checkpoint);
    std::vector<std::vector<Index>> exclude;
    if (o.data) {
      const auto split = data::chronological_split(load_filtered(*o.data));
      if (auto why = io::index_mismatch(c, split.train); !why.empty()) {
        err << "recommend: checkpoint is incompatible with the input: " << why << "\n";
        return kDataError;
      }
      exclude = eval::visited_lists(split.train);
    }
    std::size_t served = 0;
    for (const auto& uid : o.users) {
      auto it = std::find(c.user_ids.begin(), c.user_ids.end(), uid);
      if (it == c.user_ids.end()) {
        err << "recommend: warning: unknown user '" << uid << "' skipped\n";
        continue;
      }
      const auto i = static_cast<Index>(it - c.user_ids.begin());
      std::span<const Index> ex;
      if (!exclude.empty()) ex = exclude[i];
      std::size_t rank = 0;
      for (const auto& s : eval::recommend_scored(c.model, i, o.k, ex)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.9g", s.score);
        out << uid << "\t" << ++rank << "\t" << c.poi_ids[s.poi] << "\t" << buf << "\n";
      }
      ++served;
    }
    if (served == 0) {
      err << "recommend: no known users\n";
      return kDataError;
    }
  } catch (const std::exception& e) {
    err << "recommend: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

}  // namespace jtcr::cli
