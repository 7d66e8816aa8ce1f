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

// Seeded clustered embeddings on the unit sphere.
//
// Each sample is normalize(kappa * mean + z) with z ~ N(0, I_d), a cheap
// stand-in for von Mises-Fisher sampling. ID concept embeddings are the
// normalized ID cluster means; agents are jittered copies of anchor
// directions (OOD means by default).

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cma/concept_bank.hpp"
#include "cma/tensor.hpp"

namespace cma {

struct ClusterSpec {
  std::string name;
  Embedding mean;  // empty: drawn uniformly on the sphere from the spec seed
  double concentration = 1.0;
  std::size_t count = 1;
};

enum class AgentAnchor {
  kOod,       // round-robin over OOD set means
  kId,        // round-robin over ID cluster means
  kRandom,    // fresh random directions
  kExplicit,  // AgentSpec::directions
};

struct AgentSpec {
  std::size_t count = 0;
  double concentration = 8.0;
  AgentAnchor anchor = AgentAnchor::kOod;
  std::vector<Embedding> directions;
};

struct SynthSpec {
  std::uint64_t seed = 0;
  std::size_t dim = 64;
  std::vector<ClusterSpec> id_clusters;
  std::vector<ClusterSpec> ood_sets;
  AgentSpec agents;

  // Throws kBadSpec.
  void validate() const;
};

struct OodSet {
  std::string name;
  EmbeddingMatrix images;
};

// ID images with ground-truth concept indices, plus named OOD image sets.
struct Benchmark {
  EmbeddingMatrix id_images;
  std::vector<std::size_t> id_truth;  // empty when unlabeled
  std::vector<OodSet> ood_sets;

  // Throws kEmptyInput, kLengthMismatch, kDimMismatch.
  void validate() const;
};

struct SynthData {
  Benchmark benchmark;
  std::vector<std::string> id_labels;
  EmbeddingMatrix id_concepts;
  std::vector<std::string> agent_texts;
  EmbeddingMatrix agent_concepts;

  ConceptBank bank() const;
};

// Deterministic for a fixed spec. Draw order: missing cluster means (ID then
// OOD), ID images cluster by cluster, OOD images set by set, then agents.
SynthData gen_synthetic(const SynthSpec& spec);

}  // namespace cma
