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

#include "cma/experiments.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "cma/error.hpp"

namespace cma {

namespace {

std::vector<double> pick(std::span<const ScoreRecord> records, ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kCma: return cma_scores(records);
    case ScoreKind::kMcm: return mcm_scores(records);
    case ScoreKind::kRaw: return raw_scores(records);
  }
  throw Error(ErrorCode::kInvariantViolation, "unknown score kind");
}

EvalResult average_of(const std::vector<NamedEval>& per_set, double target_tpr) {
  EvalResult avg;
  avg.target_tpr = target_tpr;
  for (const auto& e : per_set) {
    avg.fpr_at_tpr += e.result.fpr_at_tpr;
    avg.auroc += e.result.auroc;
    avg.threshold_lambda += e.result.threshold_lambda;
    avg.n_id = e.result.n_id;
    avg.n_ood += e.result.n_ood;
  }
  const double n = static_cast<double>(per_set.size());
  avg.fpr_at_tpr /= n;
  avg.auroc /= n;
  avg.threshold_lambda /= n;
  return avg;
}

// Stable order of set indices by key, ties broken by name.
template <typename Key>
std::vector<std::size_t> order_by(const std::vector<AgentSetResult>& sets, Key key) {
  std::vector<std::size_t> idx(sets.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double ka = key(sets[a]);
    const double kb = key(sets[b]);
    if (ka != kb) return ka < kb;
    return sets[a].name < sets[b].name;
  });
  return idx;
}

}  // namespace

SetEvaluation evaluate_bank(const Benchmark& bench, const ConceptBank& bank, ScoreKind kind,
                            const ExperimentOptions& opts) {
  bench.validate();
  const auto id_records = score_batch(bench.id_images, bank, opts.score, opts.workers);
  const auto id_scores = pick(id_records, kind);

  SetEvaluation out;
  for (const auto& set : bench.ood_sets) {
    const auto ood_records = score_batch(set.images, bank, opts.score, opts.workers);
    out.per_set.push_back({set.name, evaluate(id_scores, pick(ood_records, kind), opts.target_tpr)});
  }
  out.average = average_of(out.per_set, opts.target_tpr);
  if (!bench.id_truth.empty()) out.id_accuracy = id_accuracy(id_records, bench.id_truth);
  return out;
}

Sweep sweep_k(const Benchmark& bench, const ConceptBank& full_bank, const std::vector<double>& ks,
              std::uint64_t seed, const ExperimentOptions& opts) {
  opts.score.validate();
  // Fail before doing any work if the pool cannot cover the largest ratio.
  for (double k : ks) {
    if (agent_count_for_ratio(k, full_bank.num_id()) > full_bank.num_agents()) {
      throw Error(ErrorCode::kInsufficientAgents, "agent pool of " + std::to_string(full_bank.num_agents()) +
                                                      " too small for k=" + std::to_string(k));
    }
  }
  Sweep sweep{"k", seed, opts.score.tau, {}};
  for (double k : ks) {
    const ConceptBank bank = subsample_agents(full_bank, k, seed);
    sweep.rows.push_back({k, bank.num_agents(), evaluate_bank(bench, bank, ScoreKind::kCma, opts)});
  }
  return sweep;
}

Sweep sweep_tau(const Benchmark& bench, const ConceptBank& bank, const std::vector<double>& taus,
                const ExperimentOptions& opts, std::uint64_t seed) {
  for (double tau : taus) ScoreConfig{tau}.validate();
  Sweep sweep{"tau", seed, opts.score.tau, {}};
  for (double tau : taus) {
    ExperimentOptions point = opts;
    point.score.tau = tau;
    sweep.rows.push_back({tau, bank.num_agents(), evaluate_bank(bench, bank, ScoreKind::kCma, point)});
  }
  return sweep;
}

AgentRanking rank_agents(const std::vector<NamedBank>& agent_sets, const Benchmark& bench,
                         const ExperimentOptions& opts) {
  if (agent_sets.size() < 2) throw Error(ErrorCode::kTooFewSets, "ranking needs at least two agent sets");
  AgentRanking out;
  for (const auto& s : agent_sets) {
    out.sets.push_back({s.name, s.bank.num_agents(), evaluate_bank(bench, s.bank, ScoreKind::kCma, opts), 0, 0});
  }
  const auto fpr_order = order_by(out.sets, [](const AgentSetResult& r) { return r.eval.average.fpr_at_tpr; });
  const auto auroc_order = order_by(out.sets, [](const AgentSetResult& r) { return -r.eval.average.auroc; });
  for (std::size_t rank = 0; rank < fpr_order.size(); ++rank) {
    out.sets[fpr_order[rank]].fpr_rank = rank + 1;
    out.by_fpr.push_back(out.sets[fpr_order[rank]].name);
    out.sets[auroc_order[rank]].auroc_rank = rank + 1;
    out.by_auroc.push_back(out.sets[auroc_order[rank]].name);
  }
  return out;
}

BenchReport run_bench(const Benchmark& bench, const ConceptBank& bank, const ExperimentOptions& opts,
                      std::uint64_t seed) {
  BenchReport r;
  r.seed = seed;
  r.tau = opts.score.tau;
  r.num_id = bank.num_id();
  r.num_agents = bank.num_agents();
  r.mcm = evaluate_bank(bench, bank, ScoreKind::kMcm, opts);
  r.cma = evaluate_bank(bench, bank, ScoreKind::kCma, opts);
  r.raw = evaluate_bank(bench, bank, ScoreKind::kRaw, opts);
  return r;
}

}  // namespace cma
