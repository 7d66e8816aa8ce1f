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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cma/tensor.hpp"

namespace cma {

// ID label embeddings (rows [0, N)) followed by agent embeddings (rows
// [N, N+M)). Labels are bare category names; no prompt template is ever
// applied to them. Immutable once built.
class ConceptBank {
 public:
  // Rows are normalized on ingest. Throws kEmptyInput (N == 0),
  // kLengthMismatch (text count vs rows), kDimMismatch, kDuplicateLabel,
  // kZeroNorm.
  static ConceptBank build(std::vector<std::string> id_labels, const EmbeddingMatrix& id_embeddings,
                           std::vector<std::string> agent_texts = {},
                           const EmbeddingMatrix& agent_embeddings = {});

  std::size_t num_id() const noexcept { return id_labels_.size(); }
  std::size_t num_agents() const noexcept { return agent_texts_.size(); }
  std::size_t num_concepts() const noexcept { return concepts_.rows(); }
  std::size_t dim() const noexcept { return concepts_.dim(); }

  const std::vector<std::string>& id_labels() const noexcept { return id_labels_; }
  const std::vector<std::string>& agent_texts() const noexcept { return agent_texts_; }

  // All N+M unit rows, ID first.
  const EmbeddingMatrix& concepts() const noexcept { return concepts_; }
  std::span<const float> concept_row(std::size_t i) const { return concepts_.row(i); }

  EmbeddingMatrix id_embeddings() const;
  EmbeddingMatrix agent_embeddings() const;

  // Same ID part, no agents.
  ConceptBank without_agents() const;

  // True when labels and ID rows match bitwise.
  bool same_id_part(const ConceptBank& other) const;

 private:
  ConceptBank() = default;

  std::vector<std::string> id_labels_;
  std::vector<std::string> agent_texts_;
  EmbeddingMatrix concepts_;
};

// Number of agents kept for ratio k: round-half-up of k * N.
std::size_t agent_count_for_ratio(double k, std::size_t num_id);

// Keeps round(k * N) agents chosen by a seeded Fisher-Yates shuffle of the
// agent indices; the kept agents stay in their original pool order. Throws
// kBadParams for negative or non-finite k, kInsufficientAgents when the pool
// is too small.
ConceptBank subsample_agents(const ConceptBank& bank, double k, std::uint64_t seed);

}  // namespace cma
