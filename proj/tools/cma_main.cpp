/*
 * Copyright 2026 The cma-ood Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// cma: zero-shot OOD scoring, evaluation and benchmark sweeps.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 internal
// invariant violation.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli_inputs.hpp"
#include "cma/error.hpp"
#include "cma/eval.hpp"
#include "cma/experiments.hpp"
#include "cma/io.hpp"
#include "cma/report.hpp"
#include "cma/scoring.hpp"
#include "cma/stats.hpp"
#include "cma/synth.hpp"

namespace {

using namespace cma;
using cli::DataSource;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct Output {
  std::string path;
  std::string format = "json";
};

void add_output(CLI::App* cmd, Output& out) {
  cmd->add_option("--out", out.path, "Report path (stdout when omitted)");
  cmd->add_option("--format", out.format, "json or csv")->capture_default_str();
}

template <typename T>
void emit(const T& report, const Output& out) {
  const ReportFormat format = parse_report_format(out.format);
  if (out.path.empty()) {
    std::cout << render_report(report, format);
  } else {
    write_report(report, format, out.path);
  }
}

void add_source(CLI::App* cmd, DataSource& src) {
  cmd->add_option("--spec", src.spec, "Synthetic benchmark spec (JSON)");
  cmd->add_option("--id-images", src.id_images, "ID image embeddings (CMAE)");
  cmd->add_option("--id", src.id_concepts, "ID label embeddings (CMAE)");
  cmd->add_option("--agents", src.agents, "Agent embeddings (CMAE)");
  cmd->add_option("--ood", src.ood, "OOD image set as name=path.cmae (repeatable)");
}

struct Common {
  std::optional<double> tau;
  std::optional<double> tpr;
  unsigned workers = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--tau", c.tau, "Softmax temperature");
  cmd->add_option("--tpr", c.tpr, "Target ID true positive rate");
  cmd->add_option("--workers", c.workers, "Worker threads (0 = all cores)");
}

ExperimentOptions options_for(const Common& c, const ExperimentDefaults& d) {
  ExperimentOptions o;
  o.score.tau = c.tau.value_or(d.tau);
  o.target_tpr = c.tpr.value_or(d.target_tpr);
  o.workers = c.workers;
  o.score.validate();
  return o;
}

// Sanity checks on freshly computed scores.
void check_records(const std::vector<ScoreRecord>& records, const ConceptBank& bank) {
  for (const auto& r : records) {
    const bool ok = r.y_hat < bank.num_id() && r.s_cma >= 0.0 && r.s_cma <= r.s_mcm && r.s_mcm <= 1.0;
    if (!ok) throw Error(ErrorCode::kInvariantViolation, "score record " + std::to_string(r.image_index));
  }
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kInvariantViolation: return kExitInternal;
    case ErrorCode::kBadTau:
    case ErrorCode::kBadTpr:
    case ErrorCode::kBadParams:
    case ErrorCode::kUnsupportedFormat:
    case ErrorCode::kTooFewSets: return kExitUsage;
    default: return kExitData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot OOD detection with concept matching and neutral-prompt agents"};
  app.set_config("--config", "", "Read flags from an INI/TOML file");
  app.require_subcommand(1);

  // score
  std::string score_images, score_id, score_agents, score_out;
  Common score_common;
  auto* score = app.add_subcommand("score", "Score image embeddings against a concept bank");
  score->add_option("--images", score_images, "Image embeddings (CMAE)")->required();
  score->add_option("--id", score_id, "ID label embeddings (CMAE)")->required();
  score->add_option("--agents", score_agents, "Agent embeddings (CMAE)");
  score->add_option("--out", score_out, "Scores CSV (stdout when omitted)");
  add_common(score, score_common);

  // eval / calibrate
  std::string eval_id, eval_ood, eval_column = "s_cma";
  Common eval_common;
  Output eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "FPR at target TPR and AUROC from two score files");
  eval_cmd->add_option("--id-scores", eval_id, "ID scores (scores CSV or one value per line)")->required();
  eval_cmd->add_option("--ood-scores", eval_ood, "OOD scores")->required();
  eval_cmd->add_option("--column", eval_column, "Score column to read")->capture_default_str();
  add_common(eval_cmd, eval_common);
  add_output(eval_cmd, eval_out);

  std::string cal_id, cal_column = "s_cma";
  Common cal_common;
  auto* calibrate = app.add_subcommand("calibrate", "Threshold that keeps the target share of ID scores");
  calibrate->add_option("--id-scores", cal_id, "ID scores")->required();
  calibrate->add_option("--column", cal_column, "Score column to read")->capture_default_str();
  add_common(calibrate, cal_common);

  // sweeps
  DataSource sk_src;
  Common sk_common;
  Output sk_out;
  std::string sk_ks;
  std::optional<std::uint64_t> sk_seed;
  auto* sweep_k_cmd = app.add_subcommand("sweep-k", "Sweep the agent ratio k = M / N");
  add_source(sweep_k_cmd, sk_src);
  sweep_k_cmd->add_option("--ks", sk_ks, "Comma-separated k values");
  sweep_k_cmd->add_option("--seed", sk_seed, "Agent subsampling seed");
  add_common(sweep_k_cmd, sk_common);
  add_output(sweep_k_cmd, sk_out);

  DataSource st_src;
  Common st_common;
  Output st_out;
  std::string st_taus;
  auto* sweep_tau_cmd = app.add_subcommand("sweep-tau", "Sweep the softmax temperature");
  add_source(sweep_tau_cmd, st_src);
  sweep_tau_cmd->add_option("--taus", st_taus, "Comma-separated temperatures");
  add_common(sweep_tau_cmd, st_common);
  add_output(sweep_tau_cmd, st_out);

  DataSource ra_src;
  Common ra_common;
  Output ra_out;
  std::vector<std::string> ra_sets;
  auto* rank_cmd = app.add_subcommand("rank-agents", "Compare agent sets by average FPR and AUROC");
  add_source(rank_cmd, ra_src);
  rank_cmd->add_option("--sets", ra_sets, "Agent set as name=path.cmae (repeatable)")->required();
  add_common(rank_cmd, ra_common);
  add_output(rank_cmd, ra_out);

  // stats
  auto* stats = app.add_subcommand("stats", "Prompt-length regression and score-change statistics");
  stats->require_subcommand(1);
  std::string lr_pairs, lr_range;
  std::optional<double> lr_tcrit;
  Output lr_out;
  auto* length_reg = stats->add_subcommand("length-reg", "OLS of score on prompt length with slope t-test");
  length_reg->add_option("--pairs", lr_pairs, "CSV with score and length or prompt columns")->required();
  length_reg->add_option("--range", lr_range, "Length filter a,b (inclusive)");
  length_reg->add_option("--t-crit", lr_tcrit, "Critical t value; prints whether |t| exceeds it");
  add_output(length_reg, lr_out);

  DataSource dl_src;
  Common dl_common;
  Output dl_out;
  std::string dl_base, dl_with;
  std::optional<std::uint64_t> dl_seed;
  DeltaParams dl_params;
  auto* delta_cmd = stats->add_subcommand("delta", "Score change from adding agents, with hypothesis checks");
  delta_cmd->add_option("--base", dl_base, "ID label embeddings for the agent-free bank (CMAE)");
  delta_cmd->add_option("--with", dl_with, "Agent embeddings added to the base bank (CMAE)");
  delta_cmd->add_option("--spec", dl_src.spec, "Synthetic benchmark spec (JSON)");
  delta_cmd->add_option("--id-images", dl_src.id_images, "ID image embeddings (CMAE)");
  delta_cmd->add_option("--ood", dl_src.ood, "OOD image set as name=path.cmae (repeatable)");
  delta_cmd->add_option("--seed", dl_seed, "Agent subsampling seed (spec mode)");
  delta_cmd->add_option("--eps", dl_params.eps)->capture_default_str();
  delta_cmd->add_option("--delta", dl_params.delta)->capture_default_str();
  delta_cmd->add_option("--alpha", dl_params.alpha)->capture_default_str();
  delta_cmd->add_option("--beta", dl_params.beta)->capture_default_str();
  add_common(delta_cmd, dl_common);
  add_output(delta_cmd, dl_out);

  // synth / bench
  std::string sy_spec, sy_dir;
  auto* synth = app.add_subcommand("synth", "Write a synthetic benchmark as CMAE files");
  synth->add_option("--spec", sy_spec, "Synthetic benchmark spec (JSON)")->required();
  synth->add_option("--out-dir", sy_dir, "Output directory")->required();

  DataSource bn_src;
  Common bn_common;
  Output bn_out;
  std::optional<std::uint64_t> bn_seed;
  std::optional<double> bn_k;
  auto* bench = app.add_subcommand("bench", "MCM vs CMA vs no-softmax on one benchmark");
  add_source(bench, bn_src);
  bench->add_option("--seed", bn_seed, "Agent subsampling seed");
  bench->add_option("--k", bn_k, "Agent ratio (spec mode default: the spec's k)");
  add_common(bench, bn_common);
  add_output(bench, bn_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*score) {
      const ConceptBank bank = cli::load_bank(score_id, score_agents);
      const auto images = load_embeddings(score_images).matrix;
      ScoreConfig cfg{score_common.tau.value_or(1.0)};
      const auto records = score_batch(images, bank, cfg, score_common.workers);
      check_records(records, bank);
      if (score_out.empty()) {
        std::cout << render_scores_csv(records);
      } else {
        write_scores_csv(records, score_out);
      }
    } else if (*eval_cmd) {
      const auto id = read_score_column(eval_id, eval_column);
      const auto ood = read_score_column(eval_ood, eval_column);
      emit(evaluate(id, ood, eval_common.tpr.value_or(kDefaultTargetTpr)), eval_out);
    } else if (*calibrate) {
      const auto id = read_score_column(cal_id, cal_column);
      std::printf("%.17g\n", calibrate_threshold(id, cal_common.tpr.value_or(kDefaultTargetTpr)));
    } else if (*sweep_k_cmd) {
      const auto data = cli::load_data(sk_src, true);
      const auto ks = sk_ks.empty() ? kDefaultKGrid : cli::parse_number_list(sk_ks);
      const std::uint64_t seed = cli::resolve_seed(sk_seed, data.data_seed);
      emit(sweep_k(data.bench, data.full_bank, ks, seed, options_for(sk_common, data.defaults)), sk_out);
    } else if (*sweep_tau_cmd) {
      const auto data = cli::load_data(st_src, false);
      const auto taus = st_taus.empty() ? kDefaultTauGrid : cli::parse_number_list(st_taus);
      const auto opts = options_for(st_common, data.defaults);
      ConceptBank bank = data.full_bank;
      if (!st_src.spec.empty()) bank = subsample_agents(bank, data.defaults.k, data.data_seed);
      emit(sweep_tau(data.bench, bank, taus, opts, data.data_seed), st_out);
    } else if (*rank_cmd) {
      const auto data = cli::load_data(ra_src, false);
      const ConceptBank base = data.full_bank.without_agents();
      std::vector<NamedBank> sets;
      for (const auto& arg : ra_sets) {
        auto [name, path] = cli::split_named_path(arg);
        const auto agents = load_embeddings(path);
        std::vector<std::string> texts = agents.manifest && !agents.manifest->labels.empty()
                                             ? agents.manifest->labels
                                             : std::vector<std::string>(agents.matrix.rows(), name);
        if (!agents.manifest || agents.manifest->labels.empty()) {
          for (std::size_t i = 0; i < texts.size(); ++i) texts[i] += "_" + std::to_string(i);
        }
        sets.push_back({name, ConceptBank::build(base.id_labels(), base.id_embeddings(), texts, agents.matrix)});
      }
      emit(rank_agents(sets, data.bench, options_for(ra_common, data.defaults)), ra_out);
    } else if (*length_reg) {
      const auto pairs = cli::read_length_pairs(lr_pairs);
      LengthRange range{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
      if (!lr_range.empty()) {
        const auto bounds = cli::parse_number_list(lr_range);
        if (bounds.size() != 2 || bounds[0] > bounds[1]) throw Error(ErrorCode::kBadParams, "--range needs a,b with a <= b");
        range = {bounds[0], bounds[1]};
      }
      const auto result = grouped_length_regression(pairs, range);
      emit(result, lr_out);
      if (lr_tcrit) {
        std::fprintf(stderr, "pooled |t| = %.6g %s t_crit = %.6g (dof %zu)\n", std::abs(result.pooled.t_stat),
                     result.pooled.significant(*lr_tcrit) ? ">" : "<=", *lr_tcrit, result.pooled.dof);
      }
    } else if (*delta_cmd) {
      ConceptBank base = ConceptBank::build({"_"}, EmbeddingMatrix(1, 2, {1.0f, 0.0f}));
      ConceptBank with = base;
      Benchmark bench_data;
      ExperimentDefaults defaults;
      if (!dl_src.spec.empty()) {
        const auto data = cli::load_data(dl_src, true);
        with = subsample_agents(data.full_bank, data.defaults.k, cli::resolve_seed(dl_seed, data.data_seed));
        base = with.without_agents();
        bench_data = data.bench;
        defaults = data.defaults;
      } else {
        if (dl_base.empty() || dl_with.empty() || dl_src.id_images.empty() || dl_src.ood.empty()) {
          throw Error(ErrorCode::kBadParams, "need --spec, or --base, --with, --id-images and --ood");
        }
        with = cli::load_bank(dl_base, dl_with);
        base = with.without_agents();
        bench_data.id_images = load_embeddings(dl_src.id_images).matrix;
        for (const auto& arg : dl_src.ood) {
          auto [name, path] = cli::split_named_path(arg);
          bench_data.ood_sets.push_back({name, load_embeddings(path).matrix});
        }
      }
      const auto opts = options_for(dl_common, defaults);
      const auto id_deltas = score_deltas(bench_data.id_images, base, with, opts.score, opts.workers);
      std::vector<double> ood_deltas;
      for (const auto& set : bench_data.ood_sets) {
        const auto d = score_deltas(set.images, base, with, opts.score, opts.workers);
        ood_deltas.insert(ood_deltas.end(), d.begin(), d.end());
      }
      emit(delta_hypothesis_check(id_deltas, ood_deltas, dl_params), dl_out);
    } else if (*synth) {
      const std::string text = read_text_file(sy_spec);
      SynthSpec spec = synth_spec_from_json(text);
      spec.seed = cli::resolve_seed(std::nullopt, spec.seed);
      const SynthData data = gen_synthetic(spec);
      const std::filesystem::path dir(sy_dir);
      std::filesystem::create_directories(dir);
      auto save = [&](const EmbeddingMatrix& m, const std::string& file, ManifestKind kind,
                      std::vector<std::string> labels) {
        write_cmae(m, dir / file);
        write_manifest({kind, std::move(labels), "synthetic", true, spec.seed}, manifest_path_for(dir / file));
      };
      std::vector<std::string> truth_labels;
      for (std::size_t t : data.benchmark.id_truth) truth_labels.push_back(data.id_labels[t]);
      save(data.benchmark.id_images, "id_images.cmae", ManifestKind::kImage, truth_labels);
      save(data.id_concepts, "id_concepts.cmae", ManifestKind::kIdText, data.id_labels);
      if (!data.agent_concepts.empty()) save(data.agent_concepts, "agents.cmae", ManifestKind::kAgentText, data.agent_texts);
      for (const auto& set : data.benchmark.ood_sets) save(set.images, "ood_" + set.name + ".cmae", ManifestKind::kImage, {});
    } else if (*bench) {
      const auto data = cli::load_data(bn_src, false);
      const std::uint64_t seed = cli::resolve_seed(bn_seed, data.data_seed);
      ConceptBank bank = data.full_bank;
      if (bn_k || !bn_src.spec.empty()) bank = subsample_agents(bank, bn_k.value_or(data.defaults.k), seed);
      emit(run_bench(data.bench, bank, options_for(bn_common, data.defaults), seed), bn_out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: IOError: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
