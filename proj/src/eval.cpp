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

#include "cma/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cma/error.hpp"

namespace cma {

namespace {

void require_nonempty(std::span<const double> scores, const char* what) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyInput, std::string(what) + " scores are empty");
}

void require_no_nan(std::span<const double> scores) {
  for (double s : scores) {
    if (std::isnan(s)) throw Error(ErrorCode::kNonFinite, "score is NaN");
  }
}

// Twice the Mann-Whitney credit, as an integer, so both AUROC routes agree exactly.
double credit_to_auroc(std::uint64_t doubled_credit, std::size_t n_id, std::size_t n_ood) {
  return static_cast<double>(doubled_credit) / (2.0 * static_cast<double>(n_id) * static_cast<double>(n_ood));
}

}  // namespace

double calibrate_threshold(std::span<const double> id_scores, double target_tpr) {
  require_nonempty(id_scores, "ID");
  require_no_nan(id_scores);
  if (!(target_tpr > 0.0 && target_tpr <= 1.0)) {
    throw Error(ErrorCode::kBadTpr, "target TPR must be in (0, 1], got " + std::to_string(target_tpr));
  }
  const std::size_t n = id_scores.size();
  const double dn = static_cast<double>(n);
  // Smallest m with m / n >= target, using the same comparison as a direct sweep.
  auto m = static_cast<std::size_t>(std::ceil(target_tpr * dn));
  m = std::clamp<std::size_t>(m, 1, n);
  while (m > 1 && static_cast<double>(m - 1) / dn >= target_tpr) --m;
  while (m < n && static_cast<double>(m) / dn < target_tpr) ++m;

  std::vector<double> sorted(id_scores.begin(), id_scores.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(m - 1), sorted.end(),
                   std::greater<>());
  return sorted[m - 1];
}

int detect(double score, double lambda) { return score >= lambda ? 1 : 0; }

double fpr_at_tpr(std::span<const double> id_scores, std::span<const double> ood_scores, double target_tpr) {
  require_nonempty(ood_scores, "OOD");
  require_no_nan(ood_scores);
  const double lambda = calibrate_threshold(id_scores, target_tpr);
  std::size_t accepted = 0;
  for (double s : ood_scores) accepted += static_cast<std::size_t>(detect(s, lambda));
  return static_cast<double>(accepted) / static_cast<double>(ood_scores.size());
}

double auroc_pairwise(std::span<const double> id_scores, std::span<const double> ood_scores) {
  require_nonempty(id_scores, "ID");
  require_nonempty(ood_scores, "OOD");
  require_no_nan(id_scores);
  require_no_nan(ood_scores);
  std::uint64_t credit = 0;
  for (double a : id_scores) {
    for (double b : ood_scores) credit += a > b ? 2 : (a == b ? 1 : 0);
  }
  return credit_to_auroc(credit, id_scores.size(), ood_scores.size());
}

double auroc_ranked(std::span<const double> id_scores, std::span<const double> ood_scores) {
  require_nonempty(id_scores, "ID");
  require_nonempty(ood_scores, "OOD");
  require_no_nan(id_scores);
  require_no_nan(ood_scores);
  std::vector<double> ood(ood_scores.begin(), ood_scores.end());
  std::sort(ood.begin(), ood.end());
  std::uint64_t credit = 0;
  for (double a : id_scores) {
    const auto lo = std::lower_bound(ood.begin(), ood.end(), a);
    const auto hi = std::upper_bound(lo, ood.end(), a);
    credit += 2 * static_cast<std::uint64_t>(lo - ood.begin()) + static_cast<std::uint64_t>(hi - lo);
  }
  return credit_to_auroc(credit, id_scores.size(), ood_scores.size());
}

double auroc(std::span<const double> id_scores, std::span<const double> ood_scores) {
  if (id_scores.size() * ood_scores.size() <= kAurocPairwiseLimit) return auroc_pairwise(id_scores, ood_scores);
  return auroc_ranked(id_scores, ood_scores);
}

EvalResult evaluate(std::span<const double> id_scores, std::span<const double> ood_scores, double target_tpr) {
  EvalResult r;
  r.target_tpr = target_tpr;
  r.threshold_lambda = calibrate_threshold(id_scores, target_tpr);
  r.fpr_at_tpr = fpr_at_tpr(id_scores, ood_scores, target_tpr);
  r.auroc = auroc(id_scores, ood_scores);
  r.n_id = id_scores.size();
  r.n_ood = ood_scores.size();
  return r;
}

double id_accuracy(std::span<const ScoreRecord> records, std::span<const std::size_t> ground_truth) {
  if (records.size() != ground_truth.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(records.size()) + " predictions vs " +
                                                std::to_string(ground_truth.size()) + " labels");
  }
  if (records.empty()) throw Error(ErrorCode::kEmptyInput, "no predictions");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < records.size(); ++i) hits += records[i].y_hat == ground_truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

}  // namespace cma
