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

// OOD detection metrics. Higher scores mean "more in-distribution"; a sample
// is accepted as ID when score >= lambda.

#include <cstddef>
#include <span>

#include "cma/scoring.hpp"

namespace cma {

inline constexpr double kDefaultTargetTpr = 0.95;

struct EvalResult {
  double fpr_at_tpr = 0.0;
  double auroc = 0.0;
  double threshold_lambda = 0.0;
  double target_tpr = kDefaultTargetTpr;
  std::size_t n_id = 0;
  std::size_t n_ood = 0;

  bool operator==(const EvalResult&) const = default;
};

// Largest threshold that keeps at least target_tpr of the ID scores: the m-th
// largest ID score, m being the smallest count with m / n >= target_tpr.
// Throws kEmptyInput, kBadTpr (target outside (0, 1]).
double calibrate_threshold(std::span<const double> id_scores, double target_tpr);

// 1 = ID, 0 = OOD. A score equal to lambda is ID.
int detect(double score, double lambda);

// Fraction of OOD scores accepted at the calibrated threshold.
double fpr_at_tpr(std::span<const double> id_scores, std::span<const double> ood_scores,
                  double target_tpr = kDefaultTargetTpr);

// Mann-Whitney AUROC with half credit for ties. Pairwise below
// kAurocPairwiseLimit pairs, rank-based above.
inline constexpr std::size_t kAurocPairwiseLimit = 1'000'000;
double auroc(std::span<const double> id_scores, std::span<const double> ood_scores);
double auroc_pairwise(std::span<const double> id_scores, std::span<const double> ood_scores);
double auroc_ranked(std::span<const double> id_scores, std::span<const double> ood_scores);

EvalResult evaluate(std::span<const double> id_scores, std::span<const double> ood_scores,
                    double target_tpr = kDefaultTargetTpr);

// Throws kLengthMismatch, kEmptyInput.
double id_accuracy(std::span<const ScoreRecord> records, std::span<const std::size_t> ground_truth);

}  // namespace cma
