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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "test_util.hpp"

namespace cma {
namespace {

ConceptBank two_label_bank(bool with_agent) {
  const auto ids = EmbeddingMatrix::from_rows({{1, 0}, {0, 1}});
  if (!with_agent) return ConceptBank::build({"cat", "dog"}, ids);
  return ConceptBank::build({"cat", "dog"}, ids, {"car"}, EmbeddingMatrix::from_rows({{0.70710678f, 0.70710678f}}));
}

// Oracle scores from float similarities, exactly as the scorer stores them.
struct OracleScores {
  std::size_t y_hat;
  long double cma;
  long double mcm;
};

OracleScores oracle_scores(std::span<const float> v, const ConceptBank& bank, double tau) {
  std::vector<long double> sims;
  for (std::size_t i = 0; i < bank.num_concepts(); ++i) {
    const long double d = std::clamp(testing::oracle_dot(v, bank.concept_row(i)), -1.0L, 1.0L);
    sims.push_back(static_cast<float>(d));
  }
  std::size_t top = 0;
  for (std::size_t i = 0; i < bank.num_id(); ++i) {
    if (sims[i] > sims[top]) top = i;
  }
  return {top, testing::oracle_softmax(sims, top, sims.size(), tau),
          testing::oracle_softmax(sims, top, bank.num_id(), tau)};
}

TEST(Score, HandFixture) {
  const Embedding v = {1, 0};
  const auto with = two_label_bank(true);
  const auto cma = cma_score(v, with);
  const auto mcm = mcm_score(v, with);
  EXPECT_EQ(cma.y_hat, 0u);
  EXPECT_NEAR(cma.score, 0.473041093302, 1e-5);
  EXPECT_NEAR(mcm.score, 0.73105857863, 1e-6);
  EXPECT_EQ(mcm_score(v, two_label_bank(false)).score, mcm.score);
}

TEST(Score, SingleLabelIsOne) {
  const auto bank = ConceptBank::build({"only"}, EmbeddingMatrix::from_rows({{0.3f, 0.4f}}));
  const Embedding v = {0, 1};
  EXPECT_DOUBLE_EQ(mcm_score(v, bank).score, 1.0);
  EXPECT_DOUBLE_EQ(cma_score(v, bank).score, 1.0);
}

TEST(Score, EqualSimilaritiesGiveUniform) {
  const auto bank = ConceptBank::build({"a", "b", "c", "d"},
                                       EmbeddingMatrix::from_rows({{1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}}));
  const Embedding v = {0, 0, 1};
  const auto p = mcm_score(v, bank, {0.3});
  EXPECT_EQ(p.y_hat, 0u);
  EXPECT_NEAR(p.score, 0.25, 1e-12);
}

TEST(Score, RawIsTopSimilarityOverTau) {
  const Embedding v = {1, 0};
  EXPECT_DOUBLE_EQ(raw_max_score(v, two_label_bank(false)).score, 1.0);
  EXPECT_DOUBLE_EQ(raw_max_score(v, two_label_bank(false), {2.0}).score, 0.5);
}

TEST(Score, RawIgnoresAgentsBitwise) {
  std::mt19937_64 gen(21);
  const auto base = testing::random_bank(gen, 10, 0, 32);
  const auto with = ConceptBank::build(base.id_labels(), base.id_embeddings(), testing::numbered_labels("agent", 100),
                                       testing::random_matrix(gen, 100, 32));
  for (int i = 0; i < 100; ++i) {
    const auto v = testing::random_unit(gen, 32);
    const auto a = raw_max_score(v, base, {0.7});
    const auto b = raw_max_score(v, with, {0.7});
    EXPECT_EQ(a.y_hat, b.y_hat);
    EXPECT_EQ(a.score, b.score);
  }
}

TEST(Score, Errors) {
  const auto bank = two_label_bank(false);
  const Embedding bad_dim = {1, 0, 0};
  const Embedding v = {1, 0};
  EXPECT_CMA_ERROR(cma_score(bad_dim, bank), ErrorCode::kDimMismatch);
  EXPECT_CMA_ERROR(cma_score(v, bank, {0.0}), ErrorCode::kBadTau);
  EXPECT_CMA_ERROR(cma_score(v, bank, {-1.0}), ErrorCode::kBadTau);
  EXPECT_CMA_ERROR(cma_score(v, bank, {INFINITY}), ErrorCode::kBadTau);
  EXPECT_CMA_ERROR(score_batch(EmbeddingMatrix{}, bank), ErrorCode::kEmptyInput);
}

TEST(Score, MatchesUnshiftedOracle) {
  std::mt19937_64 gen(31);
  for (double tau : {1e-3, 0.01, 0.1, 1.0, 64.0}) {
    for (int trial = 0; trial < 200; ++trial) {
      const auto bank = testing::random_bank(gen, 1 + trial % 12, trial % 9, 16);
      const auto v = testing::random_unit(gen, 16);
      const auto r = score_one(v, bank, {tau});
      const auto o = oracle_scores(v, bank, tau);
      ASSERT_EQ(r.y_hat, o.y_hat);
      EXPECT_NEAR(r.s_cma, static_cast<double>(o.cma), 1e-12 * std::max(1.0, static_cast<double>(o.cma)) + 1e-300);
      EXPECT_NEAR(r.s_mcm, static_cast<double>(o.mcm), 1e-12);
    }
  }
}

TEST(Score, SmallTauStaysFinite) {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 500; ++trial) {
    const auto bank = testing::random_bank(gen, 8, 8, 24);
    const auto v = testing::random_unit(gen, 24);
    const auto r = score_one(v, bank, {1e-3});
    EXPECT_TRUE(std::isfinite(r.s_cma));
    EXPECT_TRUE(std::isfinite(r.s_mcm));
    EXPECT_GE(r.s_cma, 0.0);
    EXPECT_LE(r.s_cma, 1.0);
  }
}

TEST(Score, AgentsOnlyLowerTheScore) {
  std::mt19937_64 gen(51);
  for (int trial = 0; trial < 300; ++trial) {
    const auto bank = testing::random_bank(gen, 1 + trial % 10, 1 + trial % 7, 16);
    const auto v = testing::random_unit(gen, 16);
    const ScoreConfig cfg{0.05 + 0.01 * (trial % 50)};
    const auto r = score_one(v, bank, cfg);
    EXPECT_GT(r.s_cma, 0.0);
    EXPECT_LE(r.s_cma, r.s_mcm);
    EXPECT_LE(r.s_mcm, 1.0);
    EXPECT_GE(r.s_mcm, 1.0 / static_cast<double>(bank.num_id()) - 1e-12);
    EXPECT_EQ(r.y_hat, mcm_score(v, bank.without_agents(), cfg).y_hat);
  }
}

TEST(Score, AppendingAgentStrictlyLowersScore) {
  std::mt19937_64 gen(57);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto bank = testing::random_bank(gen, 1 + trial % 10, trial % 5, 16);
    auto agents = bank.agent_embeddings().concat(testing::random_matrix(gen, 1, 16));
    const auto more = ConceptBank::build(bank.id_labels(), bank.id_embeddings(),
                                         testing::numbered_labels("a", agents.rows()), agents);
    const auto v = testing::random_unit(gen, 16);
    const ScoreConfig cfg{0.1 + 0.05 * (trial % 20)};
    EXPECT_LT(cma_score(v, more, cfg).score, cma_score(v, bank, cfg).score);
  }
}

TEST(Score, ZeroAgentsBitwiseEqual) {
  std::mt19937_64 gen(61);
  for (int trial = 0; trial < 300; ++trial) {
    const auto bank = testing::random_bank(gen, 1 + trial % 15, 0, 20);
    const auto v = testing::random_unit(gen, 20);
    const auto r = score_one(v, bank, {0.01 + trial * 0.1});
    EXPECT_EQ(r.s_cma, r.s_mcm);
  }
}

TEST(Score, TiesPickLowestIndex) {
  const auto bank = ConceptBank::build({"a", "b", "c"}, EmbeddingMatrix::from_rows({{0, 1}, {1, 0}, {1, 0}}));
  const Embedding v = {1, 0};
  EXPECT_EQ(cma_score(v, bank).y_hat, 1u);
}

TEST(ScoreBatch, RecordsMatchSingleScores) {
  std::mt19937_64 gen(71);
  const auto bank = testing::random_bank(gen, 7, 5, 16);
  const auto images = testing::random_matrix(gen, 50, 16);
  const auto records = score_batch(images, bank, {0.4}, 3);
  ASSERT_EQ(records.size(), 50u);
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto expected = score_one(images.row(i), bank, {0.4});
    expected.image_index = i;
    EXPECT_EQ(records[i], expected);
  }
  EXPECT_EQ(cma_scores(records)[3], records[3].s_cma);
  EXPECT_EQ(mcm_scores(records)[4], records[4].s_mcm);
  EXPECT_EQ(raw_scores(records)[5], records[5].s_raw);
}

TEST(ScoreBatch, WorkerCountIsBitwiseIrrelevant) {
  std::mt19937_64 gen(81);
  const auto bank = testing::random_bank(gen, 20, 20, 32);
  const auto images = testing::random_matrix(gen, 10000, 32);
  EXPECT_EQ(score_batch(images, bank, {1.0}, 1), score_batch(images, bank, {1.0}, 8));
}

}  // namespace
}  // namespace cma
