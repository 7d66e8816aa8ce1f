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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "cma/scoring.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace cma {
namespace {

TEST(ConceptBank, BuildNormalizesAndOrdersIdFirst) {
  const auto ids = EmbeddingMatrix::from_rows({{2, 0}, {0, 3}});
  const auto agents = EmbeddingMatrix::from_rows({{1, 1}});
  const auto bank = ConceptBank::build({"cat", "dog"}, ids, {"a photo of a car"}, agents);
  EXPECT_EQ(bank.num_id(), 2u);
  EXPECT_EQ(bank.num_agents(), 1u);
  EXPECT_EQ(bank.num_concepts(), 3u);
  EXPECT_EQ(bank.dim(), 2u);
  EXPECT_FLOAT_EQ(bank.concept_row(0)[0], 1.0f);
  EXPECT_FLOAT_EQ(bank.concept_row(1)[1], 1.0f);
  EXPECT_NEAR(bank.concept_row(2)[0], 0.70710678f, 1e-7);
  EXPECT_EQ(bank.id_labels()[1], "dog");
  EXPECT_EQ(bank.agent_texts()[0], "a photo of a car");
}

TEST(ConceptBank, BuildErrors) {
  const auto two = EmbeddingMatrix::from_rows({{1, 0}, {0, 1}});
  const auto three_dim = EmbeddingMatrix::from_rows({{1, 0, 0}});
  EXPECT_CMA_ERROR(ConceptBank::build({}, EmbeddingMatrix{}), ErrorCode::kEmptyInput);
  EXPECT_CMA_ERROR(ConceptBank::build({"a"}, two), ErrorCode::kLengthMismatch);
  EXPECT_CMA_ERROR(ConceptBank::build({"a", "b"}, two, {"x"}, three_dim), ErrorCode::kDimMismatch);
  EXPECT_CMA_ERROR(ConceptBank::build({"a", "a"}, two), ErrorCode::kDuplicateLabel);
  const auto zero = EmbeddingMatrix::from_rows({{0, 0}});
  EXPECT_CMA_ERROR(ConceptBank::build({"a"}, zero), ErrorCode::kZeroNorm);
  EXPECT_CMA_ERROR(ConceptBank::build({"a", "b"}, two, {"x"}, zero), ErrorCode::kZeroNorm);
}

TEST(ConceptBank, WithoutAgentsKeepsIdPart) {
  std::mt19937_64 gen(1);
  const auto bank = testing::random_bank(gen, 5, 7, 16);
  const auto base = bank.without_agents();
  EXPECT_EQ(base.num_agents(), 0u);
  EXPECT_TRUE(base.same_id_part(bank));
  const auto other = testing::random_bank(gen, 5, 0, 16);
  EXPECT_FALSE(other.same_id_part(bank));
}

TEST(AgentCount, RoundsHalfUp) {
  EXPECT_EQ(agent_count_for_ratio(0.0, 10), 0u);
  EXPECT_EQ(agent_count_for_ratio(0.25, 10), 3u);
  EXPECT_EQ(agent_count_for_ratio(0.5, 3), 2u);
  EXPECT_EQ(agent_count_for_ratio(2.0, 10), 20u);
  EXPECT_CMA_ERROR(agent_count_for_ratio(-0.1, 10), ErrorCode::kBadParams);
  EXPECT_CMA_ERROR(agent_count_for_ratio(NAN, 10), ErrorCode::kBadParams);
}

TEST(Subsample, ZeroAndFullRatio) {
  std::mt19937_64 gen(2);
  const auto bank = testing::random_bank(gen, 10, 10, 8);
  const auto none = subsample_agents(bank, 0.0, 42);
  EXPECT_EQ(none.num_agents(), 0u);
  EXPECT_TRUE(none.same_id_part(bank));
  const auto all = subsample_agents(bank, 1.0, 42);
  EXPECT_EQ(all.concepts(), bank.concepts());
  EXPECT_EQ(all.agent_texts(), bank.agent_texts());
}

TEST(Subsample, DeterministicSubsetInPoolOrder) {
  std::mt19937_64 gen(3);
  const auto bank = testing::random_bank(gen, 10, 20, 8);
  const auto a = subsample_agents(bank, 0.5, 99);
  const auto b = subsample_agents(bank, 0.5, 99);
  EXPECT_EQ(a.num_agents(), 5u);
  EXPECT_EQ(a.agent_texts(), b.agent_texts());
  EXPECT_EQ(a.concepts(), b.concepts());

  // Kept agents are a subset of the pool and keep the pool's relative order.
  const auto& pool = bank.agent_texts();
  std::vector<std::ptrdiff_t> positions;
  for (const auto& t : a.agent_texts()) {
    const auto it = std::find(pool.begin(), pool.end(), t);
    ASSERT_NE(it, pool.end());
    positions.push_back(it - pool.begin());
  }
  EXPECT_TRUE(std::is_sorted(positions.begin(), positions.end()));

  bool any_different = false;
  for (std::uint64_t seed = 0; seed < 20 && !any_different; ++seed) {
    any_different = subsample_agents(bank, 0.5, seed).agent_texts() != a.agent_texts();
  }
  EXPECT_TRUE(any_different);
}

TEST(Subsample, InsufficientAgents) {
  std::mt19937_64 gen(4);
  const auto bank = testing::random_bank(gen, 10, 5, 8);
  EXPECT_CMA_ERROR(subsample_agents(bank, 1.0, 0), ErrorCode::kInsufficientAgents);
  EXPECT_EQ(subsample_agents(bank, 0.5, 0).num_agents(), 5u);
}

TEST(ConceptBank, AgentOrderDoesNotChangeScore) {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto bank = testing::random_bank(gen, 6, 9, 12);
    auto agents = bank.agent_embeddings();
    std::vector<std::size_t> perm(agents.rows());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<std::string> texts;
    for (auto i : perm) texts.push_back(bank.agent_texts()[i]);
    const auto shuffled = ConceptBank::build(bank.id_labels(), bank.id_embeddings(), texts, agents.select(perm));
    const auto v = testing::random_unit(gen, 12);
    const ScoreConfig cfg{0.5};
    EXPECT_NEAR(cma_score(v, bank, cfg).score, cma_score(v, shuffled, cfg).score, 1e-12);
  }
}

}  // namespace
}  // namespace cma
