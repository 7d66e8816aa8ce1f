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

// Report serialization. JSON keeps full double precision and a fixed key
// order; CSV uses 6 significant digits. Neither carries timestamps, so
// reports are byte-stable for fixed inputs.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cma/eval.hpp"
#include "cma/experiments.hpp"
#include "cma/scoring.hpp"
#include "cma/stats.hpp"

namespace cma {

enum class ReportFormat { kJson, kCsv };

// Throws kUnsupportedFormat.
ReportFormat parse_report_format(std::string_view name);

std::string render_report(const EvalResult& result, ReportFormat format);
std::string render_report(const Sweep& sweep, ReportFormat format);
std::string render_report(const RegressionResult& result, ReportFormat format);
std::string render_report(const GroupedRegression& result, ReportFormat format);
std::string render_report(const DeltaReport& report, ReportFormat format);
std::string render_report(const HypothesisReport& report, ReportFormat format);
std::string render_report(const AgentRanking& ranking, ReportFormat format);
std::string render_report(const BenchReport& report, ReportFormat format);

// Writes render_report(...) to path. Throws kIoError.
template <typename T>
void write_report(const T& value, ReportFormat format, const std::filesystem::path& path);

// Scores table: image_index,y_hat,s_cma,s_mcm,s_raw. Scores use 17
// significant digits so the file round-trips into the evaluator unchanged.
std::string render_scores_csv(std::span<const ScoreRecord> records);
void write_scores_csv(std::span<const ScoreRecord> records, const std::filesystem::path& path);

// Reads either a scores table (picking `column` by header name) or a plain
// file with one number per line. Throws kIoError, kMalformedHeader.
std::vector<double> read_score_column(const std::filesystem::path& path,
                                      std::string_view column = "s_cma");

void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace cma
