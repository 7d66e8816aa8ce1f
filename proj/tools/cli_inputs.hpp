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

// Input plumbing shared by the cma subcommands.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cma/concept_bank.hpp"
#include "cma/io.hpp"
#include "cma/stats.hpp"
#include "cma/synth.hpp"

namespace cma::cli {

// Where a benchmark comes from: a synthetic spec, or CMAE files.
struct DataSource {
  std::string spec;
  std::string id_images;
  std::string id_concepts;
  std::string agents;
  std::vector<std::string> ood;  // "name=path"
};

struct LoadedData {
  Benchmark bench;
  ConceptBank full_bank;  // every available agent
  std::uint64_t data_seed = 0;
  ExperimentDefaults defaults;
};

// CMA_SEED, when set, wins over both the flag and the fallback.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t fallback);

LoadedData load_data(const DataSource& source, bool need_agents);

ConceptBank load_bank(const std::string& id_path, const std::string& agents_path);

std::pair<std::string, std::string> split_named_path(const std::string& arg);

std::vector<double> parse_number_list(const std::string& text);

// CSV with a header naming "score" and either "length" or "prompt" (token
// count taken by whitespace split), plus an optional "group" column.
std::vector<GroupedSample> read_length_pairs(const std::string& path);

}  // namespace cma::cli
