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

// CMAE embedding files and their JSON sidecar manifests.
//
// CMAE layout, all integers little-endian:
//
//   offset size  field
//   0      4     magic "CMAE"
//   4      1     version = 1
//   5      1     dtype = 0 (float32 LE)
//   6      2     reserved = 0
//   8      4     count (u32, >= 1)
//   12     4     dim   (u32, >= 2)
//   16     4*count*dim payload, row-major
//
// Files hold raw encoder output; normalization happens on load.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cma/synth.hpp"
#include "cma/tensor.hpp"

namespace cma {

inline constexpr std::array<char, 4> kCmaeMagic = {'C', 'M', 'A', 'E'};
inline constexpr std::uint8_t kCmaeVersion = 1;
inline constexpr std::uint8_t kCmaeDtypeF32 = 0;
inline constexpr std::size_t kCmaeHeaderSize = 16;

// Throws kEmptyInput for a 0-row matrix, kIoError.
void write_cmae(const EmbeddingMatrix& matrix, const std::filesystem::path& path);

// Throws kIoError, kBadMagic, kUnsupportedVersion, kMalformedHeader (bad
// dtype, reserved bytes, count or dim, trailing bytes), kTruncatedPayload.
// The payload size is checked against the file size before allocating.
EmbeddingMatrix read_cmae(const std::filesystem::path& path);

enum class ManifestKind { kIdText, kAgentText, kImage };

struct Manifest {
  ManifestKind kind = ManifestKind::kImage;
  std::vector<std::string> labels;
  std::string model;
  bool normalized = false;
  std::optional<std::uint64_t> seed;
};

// "<file>.json" next to the CMAE file.
std::filesystem::path manifest_path_for(const std::filesystem::path& cmae_path);

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
// Throws kIoError, kMalformedHeader (schema violations).
Manifest read_manifest(const std::filesystem::path& path);
// Throws kLengthMismatch when labels are present but their count differs.
void check_manifest(const Manifest& manifest, std::size_t count);

struct LoadedEmbeddings {
  EmbeddingMatrix matrix;  // unit rows
  std::optional<Manifest> manifest;
};

// read_cmae + normalize_rows + optional sidecar manifest.
LoadedEmbeddings load_embeddings(const std::filesystem::path& path);

// JSON config for the synthetic benchmark. Throws kBadSpec on schema errors.
SynthSpec synth_spec_from_json(const std::string& text);
SynthSpec load_synth_spec(const std::filesystem::path& path);

// Optional experiment settings stored next to the synthetic spec in the same
// JSON document ("tau", "k", "target_tpr").
struct ExperimentDefaults {
  double tau = 1.0;
  double k = 1.0;
  double target_tpr = 0.95;
};
ExperimentDefaults experiment_defaults_from_json(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace cma
