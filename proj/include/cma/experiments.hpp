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

#pragma once

// Benchmark runs over a set of OOD image sets: the agent-ratio sweep, the
// temperature sweep, agent-set ranking and the MCM vs CMA comparison.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cma/concept_bank.hpp"
#include "cma/eval.hpp"
#include "cma/scoring.hpp"
#include "cma/synth.hpp"

namespace cma {

inline const std::vector<double> kDefaultTauGrid = {0.1, 0.2, 0.4, 0.6, 0.8, 1.0, 1.5,
                                                    2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
inline const std::vector<double> kDefaultKGrid = {0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0};

enum class ScoreKind { kCma, kMcm, kRaw };

struct ExperimentOptions {
  ScoreConfig score;
  double target_tpr = kDefaultTargetTpr;
  unsigned workers = 0;
};

struct NamedEval {
  std::string name;
  EvalResult result;
};

// Metrics of one bank on every OOD set. The average holds the arithmetic mean
// of fpr, auroc and lambda over sets; n_ood is the total over sets.
struct SetEvaluation {
  std::vector<NamedEval> per_set;
  EvalResult average;
  std::optional<double> id_accuracy;
};

SetEvaluation evaluate_bank(const Benchmark& bench, const ConceptBank& bank, ScoreKind kind,
                            const ExperimentOptions& opts);

struct SweepRow {
  double parameter = 0.0;  // k or tau
  std::size_t num_agents = 0;
  SetEvaluation eval;
};

struct Sweep {
  std::string parameter;  // "k" or "tau"
  std::uint64_t seed = 0;
  double tau = 1.0;  // fixed tau for k sweeps; unused for tau sweeps
  std::vector<SweepRow> rows;
};

// One row per k in input order; agents subsampled from full_bank with seed.
// Throws kInsufficientAgents, kBadParams.
Sweep sweep_k(const Benchmark& bench, const ConceptBank& full_bank, const std::vector<double>& ks,
              std::uint64_t seed, const ExperimentOptions& opts);

// One row per tau in input order. Throws kBadTau.
Sweep sweep_tau(const Benchmark& bench, const ConceptBank& bank, const std::vector<double>& taus,
                const ExperimentOptions& opts, std::uint64_t seed = 0);

struct NamedBank {
  std::string name;
  ConceptBank bank;
};

struct AgentSetResult {
  std::string name;
  std::size_t num_agents = 0;
  SetEvaluation eval;
  std::size_t fpr_rank = 0;    // 1 = lowest average FPR
  std::size_t auroc_rank = 0;  // 1 = highest average AUROC
};

struct AgentRanking {
  std::vector<AgentSetResult> sets;  // input order
  std::vector<std::string> by_fpr;
  std::vector<std::string> by_auroc;
};

// Ties in either metric are ordered by name. Throws kTooFewSets (< 2 sets).
AgentRanking rank_agents(const std::vector<NamedBank>& agent_sets, const Benchmark& bench,
                         const ExperimentOptions& opts);

struct BenchReport {
  std::uint64_t seed = 0;
  double tau = 1.0;
  std::size_t num_id = 0;
  std::size_t num_agents = 0;
  SetEvaluation mcm;
  SetEvaluation cma;
  SetEvaluation raw;  // no-softmax ablation
};

// MCM (agents ignored), CMA and the no-softmax score on the same bank.
BenchReport run_bench(const Benchmark& bench, const ConceptBank& bank, const ExperimentOptions& opts,
                      std::uint64_t seed = 0);

}  // namespace cma
