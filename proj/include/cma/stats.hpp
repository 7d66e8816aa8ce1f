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

// Prompt-length regression and score-change (delta S) statistics.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cma/concept_bank.hpp"
#include "cma/scoring.hpp"

namespace cma {

// Whitespace-separated word count.
std::size_t count_tokens(std::string_view prompt);

struct LengthSample {
  double length = 0.0;  // token count L
  double score = 0.0;   // S(L)
};

struct LengthRange {
  double lo = 0.0;
  double hi = 0.0;
};

// OLS fit of S = b0 + b1 * L with the slope t-test t = b1 / SE(b1).
struct RegressionResult {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double se_beta1 = 0.0;
  double t_stat = 0.0;  // +/-inf when the fit is exact and the slope is nonzero
  bool perfect_fit = false;
  std::size_t n = 0;
  std::size_t dof = 0;  // n - 2
  LengthRange range;

  // |t| > t_crit
  bool significant(double t_crit) const;
};

// Keeps samples with L in [range.lo, range.hi]. Throws kTooFewSamples (n < 3
// after filtering), kConstantRegressor, kNonFinite.
RegressionResult length_regression(std::span<const LengthSample> samples, LengthRange range);

struct GroupedSample {
  std::string group;  // e.g. the placeholder word
  LengthSample sample;
};

struct GroupedRegression {
  // Groups sorted by name; groups that cannot be fitted are listed in skipped.
  std::vector<std::pair<std::string, RegressionResult>> groups;
  std::vector<std::string> skipped;
  RegressionResult pooled;
};

// One regression per group plus one over all samples pooled.
GroupedRegression grouped_length_regression(std::span<const GroupedSample> samples, LengthRange range);

// s_cma(with_agents) - s_cma(base). Throws kIdMismatch when the ID parts differ
// and kBadParams when base carries agents.
double score_delta(std::span<const float> v, const ConceptBank& base, const ConceptBank& with_agents,
                   const ScoreConfig& cfg = {});

std::vector<double> score_deltas(const EmbeddingMatrix& images, const ConceptBank& base,
                                 const ConceptBank& with_agents, const ScoreConfig& cfg = {},
                                 unsigned workers = 0);

struct DeltaParams {
  double eps = 0.05;
  double delta = 0.05;
  double alpha = 0.05;
  double beta = 0.05;

  // Throws kBadParams unless eps, delta > 0 and alpha, beta in (0, 1).
  void validate() const;
};

struct DeltaReport {
  std::vector<double> deltas;
  double mean = 0.0;
  double mean_abs = 0.0;
  double variance = 0.0;  // unbiased (n - 1); 0 for a single sample
  double frac_within_eps = 0.0;
  double frac_below_neg_delta = 0.0;
  DeltaParams params;
};

DeltaReport summarize_deltas(std::span<const double> deltas, const DeltaParams& params);

struct HypothesisReport {
  DeltaReport id;
  DeltaReport ood;
  // P(|dS| <= eps | ID) >= 1 - alpha
  bool id_passes = false;
  // P(dS < -delta | OOD) >= 1 - beta
  bool ood_passes = false;

  bool passes() const { return id_passes && ood_passes; }
};

// Throws kEmptyInput, kBadParams.
HypothesisReport delta_hypothesis_check(std::span<const double> id_deltas,
                                        std::span<const double> ood_deltas,
                                        const DeltaParams& params = {});

}  // namespace cma
