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

#include "cma/report.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "cma/error.hpp"
#include "cma/io.hpp"
#include "json.hpp"

namespace cma {

using ojson = nlohmann::ordered_json;

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "csv") return ReportFormat::kCsv;
  throw Error(ErrorCode::kUnsupportedFormat, "unknown report format '" + std::string(name) + "'");
}

namespace {

std::string num(double x) { return fmt::format("{:.6g}", x); }

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out + '\n';
}

// Quotes a CSV cell when needed.
std::string cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string dump(const ojson& j) { return j.dump(2) + '\n'; }

ojson to_json(const EvalResult& r) {
  ojson j;
  j["fpr_at_tpr"] = r.fpr_at_tpr;
  j["auroc"] = r.auroc;
  j["threshold_lambda"] = r.threshold_lambda;
  j["target_tpr"] = r.target_tpr;
  j["n_id"] = r.n_id;
  j["n_ood"] = r.n_ood;
  return j;
}

ojson to_json(const SetEvaluation& e) {
  ojson j;
  ojson sets = ojson::array();
  for (const auto& s : e.per_set) {
    ojson item;
    item["name"] = s.name;
    item["result"] = to_json(s.result);
    sets.push_back(std::move(item));
  }
  j["per_set"] = std::move(sets);
  j["average"] = to_json(e.average);
  j["id_accuracy"] = e.id_accuracy ? ojson(*e.id_accuracy) : ojson(nullptr);
  return j;
}

ojson to_json(const RegressionResult& r) {
  ojson j;
  j["beta0"] = r.beta0;
  j["beta1"] = r.beta1;
  j["se_beta1"] = r.se_beta1;
  j["t_stat"] = r.t_stat;  // non-finite values serialize as null
  j["perfect_fit"] = r.perfect_fit;
  j["n"] = r.n;
  j["dof"] = r.dof;
  j["length_range"] = {r.range.lo, r.range.hi};
  return j;
}

ojson to_json(const DeltaReport& r, bool with_deltas = true) {
  ojson j;
  j["n"] = r.deltas.size();
  j["mean"] = r.mean;
  j["mean_abs"] = r.mean_abs;
  j["variance"] = r.variance;
  j["frac_within_eps"] = r.frac_within_eps;
  j["frac_below_neg_delta"] = r.frac_below_neg_delta;
  j["eps"] = r.params.eps;
  j["delta"] = r.params.delta;
  j["alpha"] = r.params.alpha;
  j["beta"] = r.params.beta;
  if (with_deltas) j["deltas"] = r.deltas;
  return j;
}

std::vector<std::string> set_header(const SetEvaluation& e) {
  std::vector<std::string> h;
  for (const auto& s : e.per_set) {
    h.push_back(cell("fpr_" + s.name));
    h.push_back(cell("auroc_" + s.name));
  }
  h.insert(h.end(), {"fpr_average", "auroc_average", "threshold_lambda", "id_accuracy"});
  return h;
}

std::vector<std::string> set_cells(const SetEvaluation& e) {
  std::vector<std::string> c;
  for (const auto& s : e.per_set) {
    c.push_back(num(s.result.fpr_at_tpr));
    c.push_back(num(s.result.auroc));
  }
  c.push_back(num(e.average.fpr_at_tpr));
  c.push_back(num(e.average.auroc));
  c.push_back(num(e.average.threshold_lambda));
  c.push_back(e.id_accuracy ? num(*e.id_accuracy) : "");
  return c;
}

std::vector<std::string> regression_cells(const RegressionResult& r) {
  return {num(r.beta0),      num(r.beta1),      num(r.se_beta1), num(r.t_stat),
          std::to_string(r.n), std::to_string(r.dof), num(r.range.lo), num(r.range.hi),
          r.perfect_fit ? "1" : "0"};
}

const std::vector<std::string> kRegressionHeader = {"beta0", "beta1", "se_beta1", "t_stat", "n",
                                                    "dof", "range_lo", "range_hi", "perfect_fit"};

const std::vector<std::string> kDeltaHeader = {"n", "mean", "mean_abs", "variance", "frac_within_eps",
                                               "frac_below_neg_delta", "eps", "delta", "alpha", "beta"};

std::vector<std::string> delta_cells(const DeltaReport& r) {
  return {std::to_string(r.deltas.size()), num(r.mean), num(r.mean_abs), num(r.variance),
          num(r.frac_within_eps), num(r.frac_below_neg_delta), num(r.params.eps), num(r.params.delta),
          num(r.params.alpha), num(r.params.beta)};
}

}  // namespace

std::string render_report(const EvalResult& r, ReportFormat format) {
  if (format == ReportFormat::kJson) return dump(to_json(r));
  return join({"fpr_at_tpr", "auroc", "threshold_lambda", "target_tpr", "n_id", "n_ood"}) +
         join({num(r.fpr_at_tpr), num(r.auroc), num(r.threshold_lambda), num(r.target_tpr), std::to_string(r.n_id),
               std::to_string(r.n_ood)});
}

std::string render_report(const Sweep& sweep, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    ojson j;
    j["parameter"] = sweep.parameter;
    j["seed"] = sweep.seed;
    if (sweep.parameter == "k") j["tau"] = sweep.tau;
    ojson rows = ojson::array();
    for (const auto& r : sweep.rows) {
      ojson row;
      row[sweep.parameter] = r.parameter;
      row["num_agents"] = r.num_agents;
      row["eval"] = to_json(r.eval);
      rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return dump(j);
  }
  std::string out;
  if (sweep.rows.empty()) return join({sweep.parameter, "num_agents", "seed"});
  std::vector<std::string> header = {sweep.parameter, "num_agents", "seed"};
  const auto tail = set_header(sweep.rows.front().eval);
  header.insert(header.end(), tail.begin(), tail.end());
  out += join(header);
  for (const auto& r : sweep.rows) {
    std::vector<std::string> cells = {num(r.parameter), std::to_string(r.num_agents), std::to_string(sweep.seed)};
    const auto rest = set_cells(r.eval);
    cells.insert(cells.end(), rest.begin(), rest.end());
    out += join(cells);
  }
  return out;
}

std::string render_report(const RegressionResult& r, ReportFormat format) {
  if (format == ReportFormat::kJson) return dump(to_json(r));
  return join(kRegressionHeader) + join(regression_cells(r));
}

std::string render_report(const GroupedRegression& g, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    ojson j;
    ojson groups = ojson::array();
    for (const auto& [name, r] : g.groups) {
      ojson item;
      item["group"] = name;
      item["result"] = to_json(r);
      groups.push_back(std::move(item));
    }
    j["groups"] = std::move(groups);
    j["skipped"] = g.skipped;
    j["pooled"] = to_json(g.pooled);
    return dump(j);
  }
  std::vector<std::string> header = {"group"};
  header.insert(header.end(), kRegressionHeader.begin(), kRegressionHeader.end());
  std::string out = join(header);
  auto line = [&](const std::string& name, const RegressionResult& r) {
    std::vector<std::string> cells = {cell(name)};
    const auto rest = regression_cells(r);
    cells.insert(cells.end(), rest.begin(), rest.end());
    out += join(cells);
  };
  for (const auto& [name, r] : g.groups) line(name, r);
  line("(pooled)", g.pooled);
  return out;
}

std::string render_report(const DeltaReport& r, ReportFormat format) {
  if (format == ReportFormat::kJson) return dump(to_json(r));
  return join(kDeltaHeader) + join(delta_cells(r));
}

std::string render_report(const HypothesisReport& r, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    ojson j;
    j["id"] = to_json(r.id);
    j["ood"] = to_json(r.ood);
    j["id_passes"] = r.id_passes;
    j["ood_passes"] = r.ood_passes;
    j["passes"] = r.passes();
    return dump(j);
  }
  std::vector<std::string> header = {"population"};
  header.insert(header.end(), kDeltaHeader.begin(), kDeltaHeader.end());
  header.push_back("passes");
  std::string out = join(header);
  auto line = [&](const char* who, const DeltaReport& d, bool pass) {
    std::vector<std::string> cells = {who};
    const auto rest = delta_cells(d);
    cells.insert(cells.end(), rest.begin(), rest.end());
    cells.push_back(pass ? "1" : "0");
    out += join(cells);
  };
  line("id", r.id, r.id_passes);
  line("ood", r.ood, r.ood_passes);
  return out;
}

std::string render_report(const AgentRanking& ranking, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    ojson j;
    ojson sets = ojson::array();
    for (const auto& s : ranking.sets) {
      ojson item;
      item["name"] = s.name;
      item["num_agents"] = s.num_agents;
      item["fpr_rank"] = s.fpr_rank;
      item["auroc_rank"] = s.auroc_rank;
      item["eval"] = to_json(s.eval);
      sets.push_back(std::move(item));
    }
    j["sets"] = std::move(sets);
    j["by_fpr"] = ranking.by_fpr;
    j["by_auroc"] = ranking.by_auroc;
    return dump(j);
  }
  if (ranking.sets.empty()) return join({"name"});
  std::vector<std::string> header = {"name", "num_agents", "fpr_rank", "auroc_rank"};
  const auto tail = set_header(ranking.sets.front().eval);
  header.insert(header.end(), tail.begin(), tail.end());
  std::string out = join(header);
  for (const auto& s : ranking.sets) {
    std::vector<std::string> cells = {cell(s.name), std::to_string(s.num_agents), std::to_string(s.fpr_rank),
                                      std::to_string(s.auroc_rank)};
    const auto rest = set_cells(s.eval);
    cells.insert(cells.end(), rest.begin(), rest.end());
    out += join(cells);
  }
  return out;
}

std::string render_report(const BenchReport& r, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    ojson j;
    j["seed"] = r.seed;
    j["tau"] = r.tau;
    j["num_id"] = r.num_id;
    j["num_agents"] = r.num_agents;
    j["mcm"] = to_json(r.mcm);
    j["cma"] = to_json(r.cma);
    j["raw"] = to_json(r.raw);
    return dump(j);
  }
  std::vector<std::string> header = {"method", "seed", "tau", "num_agents"};
  const auto tail = set_header(r.cma);
  header.insert(header.end(), tail.begin(), tail.end());
  std::string out = join(header);
  auto line = [&](const char* method, const SetEvaluation& e) {
    std::vector<std::string> cells = {method, std::to_string(r.seed), num(r.tau), std::to_string(r.num_agents)};
    const auto rest = set_cells(e);
    cells.insert(cells.end(), rest.begin(), rest.end());
    out += join(cells);
  };
  line("mcm", r.mcm);
  line("cma", r.cma);
  line("raw", r.raw);
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

template <typename T>
void write_report(const T& value, ReportFormat format, const std::filesystem::path& path) {
  write_text_file(path, render_report(value, format));
}

template void write_report(const EvalResult&, ReportFormat, const std::filesystem::path&);
template void write_report(const Sweep&, ReportFormat, const std::filesystem::path&);
template void write_report(const RegressionResult&, ReportFormat, const std::filesystem::path&);
template void write_report(const GroupedRegression&, ReportFormat, const std::filesystem::path&);
template void write_report(const DeltaReport&, ReportFormat, const std::filesystem::path&);
template void write_report(const HypothesisReport&, ReportFormat, const std::filesystem::path&);
template void write_report(const AgentRanking&, ReportFormat, const std::filesystem::path&);
template void write_report(const BenchReport&, ReportFormat, const std::filesystem::path&);

std::string render_scores_csv(std::span<const ScoreRecord> records) {
  std::string out = "image_index,y_hat,s_cma,s_mcm,s_raw\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{:.17g},{:.17g},{:.17g}\n", r.image_index, r.y_hat, r.s_cma, r.s_mcm, r.s_raw);
  }
  return out;
}

void write_scores_csv(std::span<const ScoreRecord> records, const std::filesystem::path& path) {
  write_text_file(path, render_scores_csv(records));
}

std::vector<double> read_score_column(const std::filesystem::path& path, std::string_view column) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::vector<double> out;
  std::optional<std::size_t> col;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (first) {
      first = false;
      char* end = nullptr;
      std::strtod(cells[0].c_str(), &end);
      const bool numeric = end != cells[0].c_str() && *end == '\0';
      if (!numeric) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
          if (cells[i] == column) col = i;
        }
        if (!col) {
          throw Error(ErrorCode::kMalformedHeader, path.string() + ": no column '" + std::string(column) + "'");
        }
        continue;
      }
    }
    const std::size_t idx = col.value_or(0);
    if (idx >= cells.size()) throw Error(ErrorCode::kMalformedHeader, path.string() + ": short row " + std::to_string(line_no));
    char* end = nullptr;
    const double v = std::strtod(cells[idx].c_str(), &end);
    if (end == cells[idx].c_str() || *end != '\0') {
      throw Error(ErrorCode::kMalformedHeader, path.string() + ": bad number on line " + std::to_string(line_no));
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace cma
