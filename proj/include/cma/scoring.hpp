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

// Concept-matching scores for a single image embedding against a ConceptBank.
//
// With similarities s_i = sim(v, c_i), ID indices [0, N) and agents [N, N+M):
//
//   y_hat = argmax_{i < N} s_i                    (lowest index on ties)
//   MCM   = exp(s_yhat/tau) / sum_{i < N}   exp(s_i/tau)
//   CMA   = exp(s_yhat/tau) / sum_{i < N+M} exp(s_i/tau)
//   raw   = s_yhat / tau                          (no softmax; agents drop out)
//
// Agents never take part in the argmax, only in the CMA denominator. The
// exponentials are shifted by the largest similarity in the sum, and the sum
// runs in index order, so with M = 0 the CMA and MCM values are bitwise equal.

#include <cstddef>
#include <span>
#include <vector>

#include "cma/concept_bank.hpp"
#include "cma/tensor.hpp"

namespace cma {

struct ScoreConfig {
  double tau = 1.0;

  // Throws kBadTau unless tau is finite and > 0.
  void validate() const;
};

struct Prediction {
  std::size_t y_hat = 0;
  double score = 0.0;
};

struct ScoreRecord {
  std::size_t image_index = 0;
  std::size_t y_hat = 0;
  double s_cma = 0.0;
  double s_mcm = 0.0;
  double s_raw = 0.0;

  bool operator==(const ScoreRecord&) const = default;
};

// Errors for all of these: kDimMismatch, kEmptyBank, kBadTau.
Prediction cma_score(std::span<const float> v, const ConceptBank& bank, const ScoreConfig& cfg = {});
Prediction mcm_score(std::span<const float> v, const ConceptBank& bank, const ScoreConfig& cfg = {});
Prediction raw_max_score(std::span<const float> v, const ConceptBank& bank,
                         const ScoreConfig& cfg = {});

// All three scores from one similarity row; image_index is set to 0.
ScoreRecord score_one(std::span<const float> v, const ConceptBank& bank, const ScoreConfig& cfg = {});

// One record per image in input order. Output is identical for any worker count.
std::vector<ScoreRecord> score_batch(const EmbeddingMatrix& images, const ConceptBank& bank,
                                     const ScoreConfig& cfg = {}, unsigned workers = 0);

// Column accessors used by the evaluation pipeline.
std::vector<double> cma_scores(std::span<const ScoreRecord> records);
std::vector<double> mcm_scores(std::span<const ScoreRecord> records);
std::vector<double> raw_scores(std::span<const ScoreRecord> records);

}  // namespace cma
