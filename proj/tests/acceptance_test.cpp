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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cma/error.hpp"
#include "cma/eval.hpp"
#include "cma/experiments.hpp"
#include "cma/io.hpp"
#include "cma/stats.hpp"
#include "oracles.hpp"

namespace {

using namespace cma;
using cma::testing::oracle_auroc;
using cma::testing::oracle_fpr;
using cma::testing::oracle_threshold;
using cma::testing::random_bank;
using cma::testing::random_matrix;
using cma::testing::random_unit;

// Tolerances and budgets.
constexpr double kMetricTol = 1e-12;
constexpr double kCmaFixture = 0.47304, kCmaFixtureTol = 1e-5;
constexpr double kMcmFixture = 0.731059, kMcmFixtureTol = 1e-6;
constexpr double kDeltaFixture = -0.25802, kDeltaFixtureTol = 1e-5;
constexpr double kSlopeFixture = 0.9, kSlopeFixtureTol = 1e-12;
constexpr double kTFixture = 3.4017, kTFixtureTol = 1e-4;
constexpr double kAurocMarginPts = 0.5;
constexpr double kFprMarginPts = 1.0;
constexpr double kTauSpreadPts = 2.0;
constexpr std::uint64_t kReferenceSeed = 20240917;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> body;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

// Log-uniform temperature over the published grid's range.
double random_tau(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(std::log(0.1), std::log(64.0));
  return std::exp(u(gen));
}

ConceptBank with_extra_agents(const ConceptBank& bank, const EmbeddingMatrix& extra) {
  std::vector<std::string> texts = bank.agent_texts();
  for (std::size_t i = 0; i < extra.rows(); ++i) texts.push_back("extra" + std::to_string(texts.size()));
  return ConceptBank::build(bank.id_labels(), bank.id_embeddings(), texts, bank.agent_embeddings().concat(extra));
}

struct Reference {
  SynthData data;
  ConceptBank full_bank;
  ConceptBank bank;  // agents subsampled at the configured k
  ExperimentOptions opts;
};

const Reference& reference() {
  static const Reference ref = [] {
    const auto text = read_text_file(CMA_SOURCE_DIR "/configs/reference.json");
    const auto spec = synth_spec_from_json(text);
    const auto defaults = experiment_defaults_from_json(text);
    auto data = gen_synthetic(spec);
    auto full = data.bank();
    auto bank = subsample_agents(full, defaults.k, spec.seed);
    ExperimentOptions opts;
    opts.score.tau = defaults.tau;
    opts.target_tpr = defaults.target_tpr;
    return Reference{std::move(data), std::move(full), std::move(bank), opts};
  }();
  return ref;
}

Outcome zero_agent_equivalence() {
  std::mt19937_64 gen(101);
  std::uniform_int_distribution<std::size_t> n_id(1, 40), dim(2, 96);
  for (int i = 0; i < 1000; ++i) {
    const auto d = dim(gen);
    const auto bank = random_bank(gen, n_id(gen), 0, d);
    const auto v = random_unit(gen, d);
    const auto r = score_one(v, bank, {random_tau(gen)});
    if (std::memcmp(&r.s_cma, &r.s_mcm, sizeof(double)) != 0) {
      return fail(fmt::format("instance {}: cma {:.17g} vs mcm {:.17g}", i, r.s_cma, r.s_mcm));
    }
  }
  return {true, "1000 instances bitwise equal"};
}

Outcome monotonicity_and_bounds() {
  std::mt19937_64 gen(202);
  std::uniform_int_distribution<std::size_t> n_id(1, 30), n_agents(1, 30), dim(2, 64);
  for (int i = 0; i < 1000; ++i) {
    const auto d = dim(gen);
    const auto bank = random_bank(gen, n_id(gen), n_agents(gen), d);
    const auto more = with_extra_agents(bank, random_matrix(gen, 1, d));
    const auto v = random_unit(gen, d);
    const ScoreConfig cfg{random_tau(gen)};
    const auto r = score_one(v, bank, cfg);
    const auto r2 = score_one(v, more, cfg);
    if (!(0.0 < r.s_cma && r.s_cma < r.s_mcm && r.s_mcm <= 1.0)) {
      return fail(fmt::format("instance {}: cma {:.17g} mcm {:.17g}", i, r.s_cma, r.s_mcm));
    }
    if (!(r2.s_cma < r.s_cma)) return fail(fmt::format("instance {}: extra agent gave {:.17g} >= {:.17g}", i, r2.s_cma, r.s_cma));
  }
  return {true, "1000 instances: 0 < cma < mcm <= 1, one more agent lowers cma"};
}

Outcome raw_ignores_agents() {
  std::mt19937_64 gen(303);
  const std::size_t d = 48;
  const auto base = random_bank(gen, 12, 6, d);
  const auto images = random_matrix(gen, 64, d);
  const auto before = score_batch(images, base, {0.7}, 1);
  std::uniform_int_distribution<int> op(0, 2);
  std::uniform_int_distribution<std::size_t> count(1, 40);
  for (int m = 0; m < 100; ++m) {
    ConceptBank mutated = base;
    switch (op(gen)) {
      case 0: mutated = with_extra_agents(base, random_matrix(gen, count(gen), d)); break;
      case 1: mutated = base.without_agents(); break;
      case 2: mutated = subsample_agents(with_extra_agents(base, random_matrix(gen, 20, d)), 0.5, gen()); break;
    }
    const auto after = score_batch(images, mutated, {0.7}, 1);
    for (std::size_t i = 0; i < after.size(); ++i) {
      if (after[i].y_hat != before[i].y_hat || std::memcmp(&after[i].s_raw, &before[i].s_raw, sizeof(double)) != 0) {
        return fail(fmt::format("mutation {} changed image {}", m, i));
      }
    }
  }
  return {true, "100 agent-set mutations, s_raw bitwise unchanged"};
}

Outcome argmax_invariance() {
  std::mt19937_64 gen(404);
  std::uniform_int_distribution<std::size_t> n_id(1, 30), dim(2, 64);
  for (int i = 0; i < 1000; ++i) {
    const auto d = dim(gen);
    const auto n = n_id(gen);
    const auto with = random_bank(gen, n, n, d);
    const auto without = with.without_agents();
    const auto v = random_unit(gen, d);
    const std::size_t expected = mcm_score(v, without, {1.0}).y_hat;
    for (const auto* bank : {&without, &with}) {
      for (double tau : {0.1, 1.0, 64.0}) {
        const ScoreConfig cfg{tau};
        for (auto y : {cma_score(v, *bank, cfg).y_hat, mcm_score(v, *bank, cfg).y_hat, raw_max_score(v, *bank, cfg).y_hat}) {
          if (y != expected) return fail(fmt::format("instance {} tau {}: y_hat {} vs {}", i, tau, y, expected));
        }
      }
    }
  }
  const auto& ref = reference();
  const auto bench = run_bench(ref.data.benchmark, ref.bank, ref.opts, kReferenceSeed);
  if (bench.cma.id_accuracy != bench.mcm.id_accuracy) return fail("ID accuracy differs between CMA and MCM");
  return {true, fmt::format("1000 instances x 18 combos; ID-ACC {:.4f} for both", *bench.cma.id_accuracy)};
}

Outcome metric_oracles() {
  std::mt19937_64 gen(505);
  std::uniform_int_distribution<std::size_t> size(1, 200);
  std::size_t tied = 0;
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const bool ties = i % 5 != 0;
    tied += ties ? 1 : 0;
    const auto id = testing::random_scores(gen, size(gen), ties, 0.15);
    const auto ood = testing::random_scores(gen, size(gen), ties);
    const double a = auroc(id, ood), ao = oracle_auroc(id, ood);
    const double f = fpr_at_tpr(id, ood, 0.95), fo = oracle_fpr(id, ood, 0.95);
    worst = std::max({worst, std::abs(a - ao), std::abs(f - fo), std::abs(auroc_ranked(id, ood) - a)});
    if (calibrate_threshold(id, 0.95) != oracle_threshold(id, 0.95)) return fail(fmt::format("set {}: threshold", i));
  }
  if (tied < 100) return fail("fewer than 100 tied sets");
  if (worst > kMetricTol) return fail(fmt::format("max deviation {:.3g}", worst));
  return {true, fmt::format("500 sets ({} with ties), max deviation {:.3g}", tied, worst)};
}

Outcome hand_fixtures() {
  const auto ids = EmbeddingMatrix::from_rows({{1, 0}, {0, 1}});
  const auto base = ConceptBank::build({"cat", "dog"}, ids);
  const auto with = ConceptBank::build({"cat", "dog"}, ids, {"car"}, EmbeddingMatrix::from_rows({{0.70710678f, 0.70710678f}}));
  const Embedding v = {1, 0};
  const double cma = cma_score(v, with).score;
  const double mcm = mcm_score(v, with).score;
  const double delta = score_delta(v, base, with);
  const std::vector<LengthSample> pairs = {{1, 1}, {2, 2}, {3, 2}, {4, 4}};
  const auto reg = length_regression(pairs, {0, 10});
  const bool ok = std::abs(cma - kCmaFixture) <= kCmaFixtureTol && std::abs(mcm - kMcmFixture) <= kMcmFixtureTol &&
                  std::abs(delta - kDeltaFixture) <= kDeltaFixtureTol &&
                  std::abs(reg.beta1 - kSlopeFixture) <= kSlopeFixtureTol && std::abs(reg.t_stat - kTFixture) <= kTFixtureTol;
  const auto detail = fmt::format("cma {:.6f} mcm {:.6f} dS {:.6f} b1 {:.6f} t {:.5f}", cma, mcm, delta, reg.beta1, reg.t_stat);
  return {ok, detail};
}

Outcome directional_reproduction() {
  const auto& ref = reference();
  const auto r = run_bench(ref.data.benchmark, ref.bank, ref.opts, kReferenceSeed);
  const double auroc_gain = 100.0 * (r.cma.average.auroc - r.mcm.average.auroc);
  const double fpr_drop = 100.0 * (r.mcm.average.fpr_at_tpr - r.cma.average.fpr_at_tpr);
  const auto detail = fmt::format("AUROC {:.2f} -> {:.2f} (+{:.2f} pts), FPR95 {:.2f} -> {:.2f} (-{:.2f} pts)",
                                  100.0 * r.mcm.average.auroc, 100.0 * r.cma.average.auroc, auroc_gain,
                                  100.0 * r.mcm.average.fpr_at_tpr, 100.0 * r.cma.average.fpr_at_tpr, fpr_drop);
  return {auroc_gain >= kAurocMarginPts && fpr_drop >= kFprMarginPts, detail};
}

Outcome k_sweep_shape() {
  const auto& ref = reference();
  const auto s = sweep_k(ref.data.benchmark, ref.full_bank, {0.0, 0.5, 1.0, 2.0}, kReferenceSeed, ref.opts);
  const auto fpr = [&](std::size_t i) { return 100.0 * s.rows[i].eval.average.fpr_at_tpr; };
  const double early = fpr(0) - fpr(1), late = fpr(2) - fpr(3);
  const auto detail = fmt::format("FPR95 k=0 {:.2f}, 0.5 {:.2f}, 1 {:.2f}, 2 {:.2f}; gains {:.2f} vs {:.2f}", fpr(0),
                                  fpr(1), fpr(2), fpr(3), early, late);
  return {fpr(2) < fpr(0) && early > late, detail};
}

Outcome tau_insensitivity() {
  const auto& ref = reference();
  const auto s = sweep_tau(ref.data.benchmark, ref.bank, kDefaultTauGrid, ref.opts);
  double lo = 1.0, hi = 0.0;
  for (const auto& row : s.rows) {
    lo = std::min(lo, row.eval.average.auroc);
    hi = std::max(hi, row.eval.average.auroc);
  }
  const double spread = 100.0 * (hi - lo);
  return {s.rows.size() == 13 && spread <= kTauSpreadPts,
          fmt::format("13 temperatures, AUROC {:.2f}..{:.2f}, spread {:.2f} pts", 100.0 * lo, 100.0 * hi, spread)};
}

Outcome delta_suite() {
  const auto& ref = reference();
  const auto base = ref.bank.without_agents();
  const auto id = score_deltas(ref.data.benchmark.id_images, base, ref.bank, ref.opts.score);
  std::vector<double> ood;
  for (const auto& set : ref.data.benchmark.ood_sets) {
    const auto d = score_deltas(set.images, base, ref.bank, ref.opts.score);
    ood.insert(ood.end(), d.begin(), d.end());
  }
  const auto h = delta_hypothesis_check(id, ood);
  const auto detail = fmt::format("mean|dS| ID {:.4f} < OOD {:.4f}; within eps {:.3f}, below -delta {:.3f}",
                                  h.id.mean_abs, h.ood.mean_abs, h.id.frac_within_eps, h.ood.frac_below_neg_delta);
  return {h.id.mean_abs < h.ood.mean_abs && h.passes(), detail};
}

Outcome format_round_trip() {
  const auto dir = std::filesystem::temp_directory_path() / "cma_acceptance";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto path = dir / "m.cmae";
  std::mt19937_64 gen(606);
  std::normal_distribution<float> normal(0.0f, 3.0f);
  for (int i = 0; i < 100; ++i) {
    const std::size_t rows = 1 + gen() % 50, dim = 2 + gen() % 100;
    std::vector<float> data(rows * dim);
    for (auto& x : data) x = normal(gen);
    const EmbeddingMatrix m(rows, dim, data);
    write_cmae(m, path);
    const auto back = read_cmae(path);
    if (back.rows() != rows || back.dim() != dim ||
        std::memcmp(back.data().data(), m.data().data(), data.size() * sizeof(float)) != 0) {
      return fail(fmt::format("matrix {} did not round-trip", i));
    }
  }

  write_cmae(EmbeddingMatrix(2, 3, {1, 2, 3, 4, 5, 6}), path);
  std::string valid;
  {
    std::ifstream in(path, std::ios::binary);
    valid.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  struct Case {
    const char* name;
    std::function<std::string(std::string)> edit;
    ErrorCode code;
  };
  const std::vector<Case> cases = {
      {"magic", [](std::string b) { b[0] = 'X'; return b; }, ErrorCode::kBadMagic},
      {"version", [](std::string b) { b[4] = 2; return b; }, ErrorCode::kUnsupportedVersion},
      {"dtype", [](std::string b) { b[5] = 1; return b; }, ErrorCode::kMalformedHeader},
      {"reserved", [](std::string b) { b[6] = 1; return b; }, ErrorCode::kMalformedHeader},
      {"count=0", [](std::string b) { b[8] = 0; return b.substr(0, 16); }, ErrorCode::kMalformedHeader},
      {"dim<2", [](std::string b) { b[12] = 1; return b; }, ErrorCode::kMalformedHeader},
      {"trailing", [](std::string b) { return b + "\x01"; }, ErrorCode::kMalformedHeader},
      {"short payload", [](std::string b) { b.pop_back(); return b; }, ErrorCode::kTruncatedPayload},
      {"short header", [](std::string b) { return b.substr(0, 9); }, ErrorCode::kTruncatedPayload},
      {"huge count", [](std::string b) { b[11] = '\x7f'; return b; }, ErrorCode::kTruncatedPayload},
  };
  for (const auto& c : cases) {
    const auto bytes = c.edit(valid);
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    try {
      read_cmae(path);
      return fail(fmt::format("'{}' was accepted", c.name));
    } catch (const Error& e) {
      if (e.code() != c.code) return fail(fmt::format("'{}' raised {}", c.name, to_string(e.code())));
    }
  }
  std::filesystem::remove_all(dir);
  return {true, fmt::format("100 matrices bitwise, {} malformed files rejected", cases.size())};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"zero-agent equivalence", 1.0, zero_agent_equivalence},
      {"agent monotonicity and bounds", 1.0, monotonicity_and_bounds},
      {"no-softmax ablation ignores agents", 1.0, raw_ignores_agents},
      {"argmax invariance", 5.0, argmax_invariance},
      {"metric oracles", 10.0, metric_oracles},
      {"hand-computed fixtures", 1.0, hand_fixtures},
      {"synthetic directional reproduction", 5.0, directional_reproduction},
      {"k-sweep shape", 10.0, k_sweep_shape},
      {"temperature insensitivity", 15.0, tau_insensitivity},
      {"score-change hypothesis suite", 5.0, delta_suite},
      {"CMAE format round-trip", 5.0, format_round_trip},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = fail(std::string("threw ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt::format("; over budget of {:.0f} s", c.budget_s);
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] %s: %s (%.3f s)\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
