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

#include "cma/synth.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "cma/error.hpp"
#include "cma/rng.hpp"

namespace cma {

namespace {

void check_cluster(const ClusterSpec& c, std::size_t dim, const char* kind) {
  const std::string where = std::string(kind) + " cluster '" + c.name + "'";
  if (c.count < 1) throw Error(ErrorCode::kBadSpec, where + ": count must be >= 1");
  if (!std::isfinite(c.concentration) || c.concentration <= 0.0) {
    throw Error(ErrorCode::kBadSpec, where + ": concentration must be > 0");
  }
  if (!c.mean.empty() && c.mean.size() != dim) throw Error(ErrorCode::kBadSpec, where + ": mean has wrong dim");
}

Embedding random_direction(Rng& rng, std::size_t dim) {
  Embedding v(dim);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return l2_normalize(v);
}

Embedding resolve_mean(const ClusterSpec& c, Rng& rng, std::size_t dim) {
  if (c.mean.empty()) return random_direction(rng, dim);
  try {
    return l2_normalize(c.mean);
  } catch (const Error& e) {
    throw Error(ErrorCode::kBadSpec, "cluster '" + c.name + "': " + e.what());
  }
}

// Appends `count` samples of normalize(kappa * mean + z) to out.
void sample_around(const Embedding& mean, double kappa, std::size_t count, Rng& rng, std::vector<float>& out) {
  std::vector<double> x(mean.size());
  for (std::size_t n = 0; n < count; ++n) {
    double norm2 = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      x[i] = kappa * static_cast<double>(mean[i]) + rng.normal();
      norm2 += x[i] * x[i];
    }
    const double norm = std::sqrt(norm2);
    for (double xi : x) out.push_back(static_cast<float>(xi / norm));
  }
}

std::string numbered(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03zu", prefix, i);
  return buf;
}

}  // namespace

void SynthSpec::validate() const {
  if (dim < 2) throw Error(ErrorCode::kBadSpec, "dim must be >= 2");
  if (id_clusters.empty()) throw Error(ErrorCode::kBadSpec, "need at least one ID cluster");
  if (ood_sets.empty()) throw Error(ErrorCode::kBadSpec, "need at least one OOD set");
  for (const auto& c : id_clusters) check_cluster(c, dim, "ID");
  for (const auto& c : ood_sets) check_cluster(c, dim, "OOD");
  if (agents.count > 0) {
    if (!std::isfinite(agents.concentration) || agents.concentration <= 0.0) {
      throw Error(ErrorCode::kBadSpec, "agent concentration must be > 0");
    }
    if (agents.anchor == AgentAnchor::kExplicit) {
      if (agents.directions.empty()) throw Error(ErrorCode::kBadSpec, "explicit agent anchors need directions");
      for (const auto& d : agents.directions) {
        if (d.size() != dim) throw Error(ErrorCode::kBadSpec, "agent direction has wrong dim");
      }
    }
  }
}

void Benchmark::validate() const {
  if (id_images.empty()) throw Error(ErrorCode::kEmptyInput, "benchmark has no ID images");
  if (ood_sets.empty()) throw Error(ErrorCode::kEmptyInput, "benchmark has no OOD sets");
  if (!id_truth.empty() && id_truth.size() != id_images.rows()) {
    throw Error(ErrorCode::kLengthMismatch, "ID ground truth length differs from ID image count");
  }
  for (const auto& s : ood_sets) {
    if (s.images.empty()) throw Error(ErrorCode::kEmptyInput, "OOD set '" + s.name + "' is empty");
    if (s.images.dim() != id_images.dim()) throw Error(ErrorCode::kDimMismatch, "OOD set '" + s.name + "' dim");
  }
}

ConceptBank SynthData::bank() const {
  return ConceptBank::build(id_labels, id_concepts, agent_texts, agent_concepts);
}

SynthData gen_synthetic(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t d = spec.dim;

  std::vector<Embedding> id_means, ood_means;
  for (const auto& c : spec.id_clusters) id_means.push_back(resolve_mean(c, rng, d));
  for (const auto& c : spec.ood_sets) ood_means.push_back(resolve_mean(c, rng, d));

  SynthData out;
  std::vector<float> data;
  for (std::size_t c = 0; c < spec.id_clusters.size(); ++c) {
    const auto& cl = spec.id_clusters[c];
    sample_around(id_means[c], cl.concentration, cl.count, rng, data);
    out.benchmark.id_truth.insert(out.benchmark.id_truth.end(), cl.count, c);
    out.id_labels.push_back(cl.name.empty() ? numbered("id", c) : cl.name);
  }
  out.benchmark.id_images = EmbeddingMatrix(out.benchmark.id_truth.size(), d, std::move(data));
  out.id_concepts = EmbeddingMatrix::from_rows(id_means);

  for (std::size_t s = 0; s < spec.ood_sets.size(); ++s) {
    const auto& cl = spec.ood_sets[s];
    std::vector<float> set_data;
    sample_around(ood_means[s], cl.concentration, cl.count, rng, set_data);
    out.benchmark.ood_sets.push_back(
        {cl.name.empty() ? numbered("ood", s) : cl.name, EmbeddingMatrix(cl.count, d, std::move(set_data))});
  }

  const auto& ag = spec.agents;
  std::vector<float> agent_data;
  for (std::size_t a = 0; a < ag.count; ++a) {
    Embedding anchor;
    switch (ag.anchor) {
      case AgentAnchor::kOod: anchor = ood_means[a % ood_means.size()]; break;
      case AgentAnchor::kId: anchor = id_means[a % id_means.size()]; break;
      case AgentAnchor::kRandom: anchor = random_direction(rng, d); break;
      case AgentAnchor::kExplicit: anchor = l2_normalize(ag.directions[a % ag.directions.size()]); break;
    }
    sample_around(anchor, ag.concentration, 1, rng, agent_data);
    out.agent_texts.push_back(numbered("agent", a));
  }
  out.agent_concepts = ag.count == 0 ? EmbeddingMatrix{} : EmbeddingMatrix(ag.count, d, std::move(agent_data));
  return out;
}

}  // namespace cma
