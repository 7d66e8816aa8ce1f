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

#include "cma/stats.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "cma/error.hpp"

namespace cma {

std::size_t count_tokens(std::string_view prompt) {
  std::istringstream in{std::string(prompt)};
  std::size_t n = 0;
  for (std::string word; in >> word;) ++n;
  return n;
}

bool RegressionResult::significant(double t_crit) const { return std::abs(t_stat) > t_crit; }

RegressionResult length_regression(std::span<const LengthSample> samples, LengthRange range) {
  std::vector<LengthSample> kept;
  for (const auto& s : samples) {
    if (!std::isfinite(s.length) || !std::isfinite(s.score)) throw Error(ErrorCode::kNonFinite, "non-finite sample");
    if (s.length >= range.lo && s.length <= range.hi) kept.push_back(s);
  }
  const std::size_t n = kept.size();
  if (n < 3) throw Error(ErrorCode::kTooFewSamples, std::to_string(n) + " samples in range, need >= 3");
  bool constant = true;
  for (const auto& s : kept) constant = constant && s.length == kept.front().length;
  if (constant) throw Error(ErrorCode::kConstantRegressor, "all prompt lengths are equal");

  const double dn = static_cast<double>(n);
  double mean_l = 0.0, mean_s = 0.0;
  for (const auto& s : kept) {
    mean_l += s.length;
    mean_s += s.score;
  }
  mean_l /= dn;
  mean_s /= dn;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& s : kept) {
    const double dl = s.length - mean_l;
    const double ds = s.score - mean_s;
    sxx += dl * dl;
    sxy += dl * ds;
    syy += ds * ds;
  }

  RegressionResult r;
  r.n = n;
  r.dof = n - 2;
  r.range = range;
  r.beta1 = sxy / sxx;
  r.beta0 = mean_s - r.beta1 * mean_l;
  double sse = 0.0;
  for (const auto& s : kept) {
    const double e = s.score - r.beta0 - r.beta1 * s.length;
    sse += e * e;
  }
  // Residual energy at rounding level counts as an exact fit.
  if (sse <= 1e-24 * std::max(syy, 1.0)) {
    r.perfect_fit = true;
    r.se_beta1 = 0.0;
    r.t_stat = r.beta1 == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), r.beta1);
    return r;
  }
  r.se_beta1 = std::sqrt(sse / (static_cast<double>(r.dof) * sxx));
  r.t_stat = r.beta1 / r.se_beta1;
  return r;
}

GroupedRegression grouped_length_regression(std::span<const GroupedSample> samples, LengthRange range) {
  std::map<std::string, std::vector<LengthSample>> by_group;
  std::vector<LengthSample> all;
  all.reserve(samples.size());
  for (const auto& g : samples) {
    by_group[g.group].push_back(g.sample);
    all.push_back(g.sample);
  }
  GroupedRegression out;
  for (const auto& [name, group] : by_group) {
    try {
      out.groups.emplace_back(name, length_regression(group, range));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTooFewSamples && e.code() != ErrorCode::kConstantRegressor) throw;
      out.skipped.push_back(name);
    }
  }
  out.pooled = length_regression(all, range);
  return out;
}

namespace {

void check_delta_banks(const ConceptBank& base, const ConceptBank& with_agents) {
  if (base.num_agents() != 0) throw Error(ErrorCode::kBadParams, "base bank must not carry agents");
  if (!base.same_id_part(with_agents)) throw Error(ErrorCode::kIdMismatch, "banks have different ID concepts");
}

}  // namespace

double score_delta(std::span<const float> v, const ConceptBank& base, const ConceptBank& with_agents,
                   const ScoreConfig& cfg) {
  check_delta_banks(base, with_agents);
  return cma_score(v, with_agents, cfg).score - cma_score(v, base, cfg).score;
}

std::vector<double> score_deltas(const EmbeddingMatrix& images, const ConceptBank& base,
                                 const ConceptBank& with_agents, const ScoreConfig& cfg, unsigned workers) {
  check_delta_banks(base, with_agents);
  const auto with = score_batch(images, with_agents, cfg, workers);
  const auto without = score_batch(images, base, cfg, workers);
  std::vector<double> out(with.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = with[i].s_cma - without[i].s_cma;
  return out;
}

void DeltaParams::validate() const {
  const bool ok = eps > 0.0 && delta > 0.0 && alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0 &&
                  std::isfinite(eps) && std::isfinite(delta);
  if (!ok) throw Error(ErrorCode::kBadParams, "need eps, delta > 0 and alpha, beta in (0, 1)");
}

DeltaReport summarize_deltas(std::span<const double> deltas, const DeltaParams& params) {
  if (deltas.empty()) throw Error(ErrorCode::kEmptyInput, "no score deltas");
  DeltaReport r;
  r.deltas.assign(deltas.begin(), deltas.end());
  r.params = params;
  const double n = static_cast<double>(deltas.size());
  std::size_t within = 0, below = 0;
  for (double d : deltas) {
    r.mean += d;
    r.mean_abs += std::abs(d);
    within += std::abs(d) <= params.eps ? 1 : 0;
    below += d < -params.delta ? 1 : 0;
  }
  r.mean /= n;
  r.mean_abs /= n;
  if (deltas.size() > 1) {
    for (double d : deltas) r.variance += (d - r.mean) * (d - r.mean);
    r.variance /= n - 1.0;
  }
  r.frac_within_eps = static_cast<double>(within) / n;
  r.frac_below_neg_delta = static_cast<double>(below) / n;
  return r;
}

HypothesisReport delta_hypothesis_check(std::span<const double> id_deltas, std::span<const double> ood_deltas,
                                        const DeltaParams& params) {
  params.validate();
  HypothesisReport r;
  r.id = summarize_deltas(id_deltas, params);
  r.ood = summarize_deltas(ood_deltas, params);
  r.id_passes = r.id.frac_within_eps >= 1.0 - params.alpha;
  r.ood_passes = r.ood.frac_below_neg_delta >= 1.0 - params.beta;
  return r;
}

}  // namespace cma
