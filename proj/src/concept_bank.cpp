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

#include "cma/concept_bank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

#include "cma/error.hpp"
#include "cma/rng.hpp"

namespace cma {

ConceptBank ConceptBank::build(std::vector<std::string> id_labels, const EmbeddingMatrix& id_embeddings,
                               std::vector<std::string> agent_texts, const EmbeddingMatrix& agent_embeddings) {
  if (id_labels.empty() || id_embeddings.empty()) throw Error(ErrorCode::kEmptyInput, "bank needs at least one ID label");
  if (id_labels.size() != id_embeddings.rows()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(id_labels.size()) + " ID labels for " +
                                                std::to_string(id_embeddings.rows()) + " rows");
  }
  if (agent_texts.size() != agent_embeddings.rows()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(agent_texts.size()) + " agent texts for " +
                                                std::to_string(agent_embeddings.rows()) + " rows");
  }
  if (!agent_embeddings.empty() && agent_embeddings.dim() != id_embeddings.dim()) {
    throw Error(ErrorCode::kDimMismatch, "ID dim " + std::to_string(id_embeddings.dim()) + " vs agent dim " +
                                             std::to_string(agent_embeddings.dim()));
  }
  std::unordered_set<std::string> seen;
  for (const auto& label : id_labels) {
    if (!seen.insert(label).second) throw Error(ErrorCode::kDuplicateLabel, "ID label '" + label + "' repeated");
  }

  ConceptBank bank;
  bank.id_labels_ = std::move(id_labels);
  bank.agent_texts_ = std::move(agent_texts);
  bank.concepts_ = normalize_rows(id_embeddings).concat(normalize_rows(agent_embeddings));
  return bank;
}

EmbeddingMatrix ConceptBank::id_embeddings() const {
  std::vector<std::size_t> idx(num_id());
  std::iota(idx.begin(), idx.end(), 0);
  return concepts_.select(idx);
}

EmbeddingMatrix ConceptBank::agent_embeddings() const {
  std::vector<std::size_t> idx(num_agents());
  std::iota(idx.begin(), idx.end(), num_id());
  return concepts_.select(idx);
}

ConceptBank ConceptBank::without_agents() const {
  ConceptBank out;
  out.id_labels_ = id_labels_;
  out.concepts_ = id_embeddings();
  return out;
}

bool ConceptBank::same_id_part(const ConceptBank& other) const {
  if (id_labels_ != other.id_labels_ || dim() != other.dim()) return false;
  const auto a = concepts_.data().first(num_id() * dim());
  const auto b = other.concepts_.data().first(num_id() * dim());
  return std::equal(a.begin(), a.end(), b.begin());
}

std::size_t agent_count_for_ratio(double k, std::size_t num_id) {
  if (!std::isfinite(k) || k < 0.0) throw Error(ErrorCode::kBadParams, "agent ratio k must be finite and >= 0");
  return static_cast<std::size_t>(std::floor(k * static_cast<double>(num_id) + 0.5));
}

ConceptBank subsample_agents(const ConceptBank& bank, double k, std::uint64_t seed) {
  const std::size_t keep = agent_count_for_ratio(k, bank.num_id());
  if (keep > bank.num_agents()) {
    throw Error(ErrorCode::kInsufficientAgents, "k=" + std::to_string(k) + " needs " + std::to_string(keep) +
                                                    " agents, pool has " + std::to_string(bank.num_agents()));
  }
  std::vector<std::size_t> order(bank.num_agents());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  order.resize(keep);
  std::sort(order.begin(), order.end());

  std::vector<std::string> texts;
  texts.reserve(keep);
  for (std::size_t i : order) texts.push_back(bank.agent_texts()[i]);
  const EmbeddingMatrix agents = bank.agent_embeddings().select(order);
  return ConceptBank::build(bank.id_labels(), bank.id_embeddings(), std::move(texts),
                            keep == 0 ? EmbeddingMatrix{} : agents);
}

}  // namespace cma
