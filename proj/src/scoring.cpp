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

#include "cma/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cma/error.hpp"
#include "cma/parallel.hpp"

namespace cma {

void ScoreConfig::validate() const {
  if (!std::isfinite(tau) || tau <= 0.0) throw Error(ErrorCode::kBadTau, "tau must be finite and > 0");
}

namespace {

void check_inputs(std::span<const float> v, const ConceptBank& bank) {
  if (bank.num_id() == 0) throw Error(ErrorCode::kEmptyBank, "bank has no ID concepts");
  if (v.size() != bank.dim()) {
    throw Error(ErrorCode::kDimMismatch,
                "image dim " + std::to_string(v.size()) + " vs bank dim " + std::to_string(bank.dim()));
  }
}

// Similarities of v to every concept, ID first.
void similarity_row(std::span<const float> v, const ConceptBank& bank, std::vector<float>& sims) {
  sims.resize(bank.num_concepts());
  for (std::size_t i = 0; i < sims.size(); ++i) sims[i] = cosine_sim(v, bank.concept_row(i));
}

std::size_t id_argmax(std::span<const float> sims, std::size_t num_id) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < num_id; ++i) {
    if (sims[i] > sims[best]) best = i;
  }
  return best;
}

// exp(s_top/tau) / sum_i exp(s_i/tau) over `terms`, shifted by max(terms).
double softmax_at(std::span<const float> terms, float top, double tau) {
  const double shift = *std::max_element(terms.begin(), terms.end());
  double denom = 0.0;
  for (float s : terms) denom += std::exp((static_cast<double>(s) - shift) / tau);
  return std::exp((static_cast<double>(top) - shift) / tau) / denom;
}

ScoreRecord score_row(std::span<const float> sims, std::size_t num_id, double tau) {
  ScoreRecord r;
  r.y_hat = id_argmax(sims, num_id);
  const float top = sims[r.y_hat];
  r.s_mcm = softmax_at(sims.first(num_id), top, tau);
  r.s_cma = softmax_at(sims, top, tau);
  r.s_raw = static_cast<double>(top) / tau;
  return r;
}

}  // namespace

ScoreRecord score_one(std::span<const float> v, const ConceptBank& bank, const ScoreConfig& cfg) {
  cfg.validate();
  check_inputs(v, bank);
  std::vector<float> sims;
  similarity_row(v, bank, sims);
  return score_row(sims, bank.num_id(), cfg.tau);
}

Prediction cma_score(std::span<const float> v, const ConceptBank& bank, const ScoreConfig& cfg) {
  const ScoreRecord r = score_one(v, bank, cfg);
  return {r.y_hat, r.s_cma};
}

Prediction mcm_score(std::span<const float> v, const ConceptBank& bank, const ScoreConfig& cfg) {
  const ScoreRecord r = score_one(v, bank, cfg);
  return {r.y_hat, r.s_mcm};
}

Prediction raw_max_score(std::span<const float> v, const ConceptBank& bank, const ScoreConfig& cfg) {
  const ScoreRecord r = score_one(v, bank, cfg);
  return {r.y_hat, r.s_raw};
}

std::vector<ScoreRecord> score_batch(const EmbeddingMatrix& images, const ConceptBank& bank,
                                     const ScoreConfig& cfg, unsigned workers) {
  cfg.validate();
  if (images.empty()) throw Error(ErrorCode::kEmptyInput, "no images to score");
  if (bank.num_id() == 0) throw Error(ErrorCode::kEmptyBank, "bank has no ID concepts");
  if (images.dim() != bank.dim()) {
    throw Error(ErrorCode::kDimMismatch,
                "image dim " + std::to_string(images.dim()) + " vs bank dim " + std::to_string(bank.dim()));
  }
  std::vector<ScoreRecord> out(images.rows());
  parallel_for(images.rows(), workers, [&](std::size_t i) {
    thread_local std::vector<float> sims;
    similarity_row(images.row(i), bank, sims);
    out[i] = score_row(sims, bank.num_id(), cfg.tau);
    out[i].image_index = i;
  });
  return out;
}

namespace {

template <typename Field>
std::vector<double> column(std::span<const ScoreRecord> records, Field field) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.*field);
  return out;
}

}  // namespace

std::vector<double> cma_scores(std::span<const ScoreRecord> records) { return column(records, &ScoreRecord::s_cma); }
std::vector<double> mcm_scores(std::span<const ScoreRecord> records) { return column(records, &ScoreRecord::s_mcm); }
std::vector<double> raw_scores(std::span<const ScoreRecord> records) { return column(records, &ScoreRecord::s_raw); }

}  // namespace cma
