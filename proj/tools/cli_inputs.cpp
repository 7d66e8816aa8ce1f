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

#include "cli_inputs.hpp"

#include <cstdlib>
#include <map>
#include <sstream>

#include "cma/error.hpp"

namespace cma::cli {

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t fallback) {
  if (const char* env = std::getenv("CMA_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw Error(ErrorCode::kBadParams, "CMA_SEED is not an unsigned integer");
    return v;
  }
  return flag.value_or(fallback);
}

std::pair<std::string, std::string> split_named_path(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
    throw Error(ErrorCode::kBadParams, "expected name=path, got '" + arg + "'");
  }
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') throw Error(ErrorCode::kBadParams, "bad number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::kBadParams, "empty number list");
  return out;
}

namespace {

std::vector<std::string> labels_or_numbered(const LoadedEmbeddings& e, const char* prefix) {
  if (e.manifest && !e.manifest->labels.empty()) return e.manifest->labels;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < e.matrix.rows(); ++i) out.push_back(std::string(prefix) + std::to_string(i));
  return out;
}

// Ground truth from image-manifest labels that name ID concepts; empty if any
// image label is unknown.
std::vector<std::size_t> truth_from_labels(const LoadedEmbeddings& images, const std::vector<std::string>& id_labels) {
  if (!images.manifest || images.manifest->labels.empty()) return {};
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < id_labels.size(); ++i) index[id_labels[i]] = i;
  std::vector<std::size_t> truth;
  for (const auto& l : images.manifest->labels) {
    const auto it = index.find(l);
    if (it == index.end()) return {};
    truth.push_back(it->second);
  }
  return truth;
}

}  // namespace

ConceptBank load_bank(const std::string& id_path, const std::string& agents_path) {
  const auto id = load_embeddings(id_path);
  if (agents_path.empty()) return ConceptBank::build(labels_or_numbered(id, "id_"), id.matrix);
  const auto agents = load_embeddings(agents_path);
  return ConceptBank::build(labels_or_numbered(id, "id_"), id.matrix, labels_or_numbered(agents, "agent_"),
                            agents.matrix);
}

LoadedData load_data(const DataSource& source, bool need_agents) {
  if (!source.spec.empty()) {
    const std::string text = read_text_file(source.spec);
    SynthSpec spec = synth_spec_from_json(text);
    spec.seed = resolve_seed(std::nullopt, spec.seed);
    SynthData data = gen_synthetic(spec);
    ConceptBank bank = data.bank();
    return {std::move(data.benchmark), std::move(bank), spec.seed, experiment_defaults_from_json(text)};
  }
  if (source.id_images.empty() || source.id_concepts.empty() || source.ood.empty()) {
    throw Error(ErrorCode::kBadParams, "need --spec, or --id-images, --id and at least one --ood name=path");
  }
  if (need_agents && source.agents.empty()) throw Error(ErrorCode::kBadParams, "this command needs --agents");
  LoadedData out{Benchmark{}, load_bank(source.id_concepts, source.agents), 0, {}};
  const auto images = load_embeddings(source.id_images);
  out.bench.id_images = images.matrix;
  out.bench.id_truth = truth_from_labels(images, out.full_bank.id_labels());
  for (const auto& arg : source.ood) {
    auto [name, path] = split_named_path(arg);
    out.bench.ood_sets.push_back({name, load_embeddings(path).matrix});
  }
  out.bench.validate();
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cells.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back();
    } else {
      cells.back() += c;
    }
  }
  return cells;
}

double to_double(const std::string& s, std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') {
    throw Error(ErrorCode::kMalformedHeader, "bad number '" + s + "' on line " + std::to_string(line_no));
  }
  return v;
}

}  // namespace

std::vector<GroupedSample> read_length_pairs(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kEmptyInput, path + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  std::optional<std::size_t> score_col, length_col, prompt_col, group_col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "score") score_col = i;
    if (header[i] == "length") length_col = i;
    if (header[i] == "prompt") prompt_col = i;
    if (header[i] == "group") group_col = i;
  }
  if (!score_col || (!length_col && !prompt_col)) {
    throw Error(ErrorCode::kMalformedHeader, path + ": header needs 'score' and 'length' or 'prompt'");
  }
  std::vector<GroupedSample> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kMalformedHeader, path + ": wrong cell count on line " + std::to_string(line_no));
    }
    GroupedSample s;
    s.group = group_col ? cells[*group_col] : "all";
    s.sample.score = to_double(cells[*score_col], line_no);
    s.sample.length = length_col ? to_double(cells[*length_col], line_no)
                                 : static_cast<double>(count_tokens(cells[*prompt_col]));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace cma::cli
