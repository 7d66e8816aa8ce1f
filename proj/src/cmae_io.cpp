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

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "cma/error.hpp"
#include "cma/io.hpp"
#include "json.hpp"

namespace cma {

using json = nlohmann::json;

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_cmae(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
  if (matrix.empty()) throw Error(ErrorCode::kEmptyInput, "CMAE files need at least one row");
  if (matrix.rows() > UINT32_MAX || matrix.dim() > UINT32_MAX) {
    throw Error(ErrorCode::kBadParams, "matrix too large for a CMAE header");
  }
  std::string bytes;
  bytes.reserve(kCmaeHeaderSize + matrix.data().size() * 4);
  bytes.append(kCmaeMagic.data(), kCmaeMagic.size());
  bytes.push_back(static_cast<char>(kCmaeVersion));
  bytes.push_back(static_cast<char>(kCmaeDtypeF32));
  bytes.push_back('\0');
  bytes.push_back('\0');
  put_u32(bytes, static_cast<std::uint32_t>(matrix.rows()));
  put_u32(bytes, static_cast<std::uint32_t>(matrix.dim()));
  for (float x : matrix.data()) put_u32(bytes, std::bit_cast<std::uint32_t>(x));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

EmbeddingMatrix read_cmae(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::error_code ec;
  const auto file_size = std::filesystem::file_size(path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot stat " + path.string());

  unsigned char header[kCmaeHeaderSize] = {};
  in.read(reinterpret_cast<char*>(header), kCmaeHeaderSize);
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got < kCmaeHeaderSize) {
    if (got >= 4 && std::memcmp(header, kCmaeMagic.data(), 4) != 0) throw Error(ErrorCode::kBadMagic, path.string());
    throw Error(ErrorCode::kTruncatedPayload, path.string() + ": shorter than the 16-byte header");
  }
  if (std::memcmp(header, kCmaeMagic.data(), 4) != 0) throw Error(ErrorCode::kBadMagic, path.string());
  if (header[4] != kCmaeVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, path.string() + ": version " + std::to_string(header[4]));
  }
  if (header[5] != kCmaeDtypeF32) throw Error(ErrorCode::kMalformedHeader, path.string() + ": unknown dtype");
  if (header[6] != 0 || header[7] != 0) {
    throw Error(ErrorCode::kMalformedHeader, path.string() + ": reserved bytes are not zero");
  }
  const std::uint32_t count = get_u32(header + 8);
  const std::uint32_t dim = get_u32(header + 12);
  if (count < 1) throw Error(ErrorCode::kMalformedHeader, path.string() + ": count is 0");
  if (dim < 2) throw Error(ErrorCode::kMalformedHeader, path.string() + ": dim below 2");

  const std::uint64_t payload = std::uint64_t{count} * dim * 4;
  const std::uint64_t available = file_size - kCmaeHeaderSize;
  if (payload > available) {
    throw Error(ErrorCode::kTruncatedPayload, path.string() + ": header declares " + std::to_string(payload) +
                                                  " payload bytes, file has " + std::to_string(available));
  }
  if (payload < available) throw Error(ErrorCode::kMalformedHeader, path.string() + ": trailing bytes");

  std::string raw(static_cast<std::size_t>(payload), '\0');
  if (!in.read(raw.data(), static_cast<std::streamsize>(payload))) {
    throw Error(ErrorCode::kTruncatedPayload, path.string());
  }
  std::vector<float> data(static_cast<std::size_t>(count) * dim);
  const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = std::bit_cast<float>(get_u32(p + 4 * i));
  return EmbeddingMatrix(count, dim, std::move(data));
}

// Manifests

namespace {

const char* kind_name(ManifestKind k) {
  switch (k) {
    case ManifestKind::kIdText: return "id_text";
    case ManifestKind::kAgentText: return "agent_text";
    case ManifestKind::kImage: return "image";
  }
  return "image";
}

}  // namespace

std::filesystem::path manifest_path_for(const std::filesystem::path& cmae_path) {
  return std::filesystem::path(cmae_path.string() + ".json");
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["kind"] = kind_name(m.kind);
  j["labels"] = m.labels;
  j["model"] = m.model;
  j["normalized"] = m.normalized;
  if (m.seed) j["seed"] = *m.seed;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    const json j = json::parse(text);
    Manifest m;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "id_text") {
      m.kind = ManifestKind::kIdText;
    } else if (kind == "agent_text") {
      m.kind = ManifestKind::kAgentText;
    } else if (kind == "image") {
      m.kind = ManifestKind::kImage;
    } else {
      throw Error(ErrorCode::kMalformedHeader, path.string() + ": unknown manifest kind '" + kind + "'");
    }
    if (j.contains("labels")) m.labels = j.at("labels").get<std::vector<std::string>>();
    if (j.contains("model")) m.model = j.at("model").get<std::string>();
    if (j.contains("normalized")) m.normalized = j.at("normalized").get<bool>();
    if (j.contains("seed") && !j.at("seed").is_null()) m.seed = j.at("seed").get<std::uint64_t>();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedHeader, path.string() + ": " + e.what());
  }
}

void check_manifest(const Manifest& m, std::size_t count) {
  const bool text_kind = m.kind != ManifestKind::kImage;
  if ((text_kind || !m.labels.empty()) && m.labels.size() != count) {
    throw Error(ErrorCode::kLengthMismatch, std::string(kind_name(m.kind)) + " manifest lists " +
                                                std::to_string(m.labels.size()) + " labels for " +
                                                std::to_string(count) + " rows");
  }
}

LoadedEmbeddings load_embeddings(const std::filesystem::path& path) {
  LoadedEmbeddings out{normalize_rows(read_cmae(path)), std::nullopt};
  const auto mpath = manifest_path_for(path);
  if (std::filesystem::exists(mpath)) {
    out.manifest = read_manifest(mpath);
    check_manifest(*out.manifest, out.matrix.rows());
  }
  return out;
}

// Synthetic spec config

namespace {

ClusterSpec parse_cluster(const json& j) {
  ClusterSpec c;
  c.name = j.value("name", std::string{});
  c.concentration = j.at("concentration").get<double>();
  c.count = j.at("count").get<std::size_t>();
  if (j.contains("mean")) c.mean = j.at("mean").get<std::vector<float>>();
  return c;
}

// Either a list of clusters or {"replicate": n, "prefix": ..., <cluster fields>}.
std::vector<ClusterSpec> parse_clusters(const json& j) {
  std::vector<ClusterSpec> out;
  if (j.is_array()) {
    for (const auto& c : j) out.push_back(parse_cluster(c));
    return out;
  }
  const auto n = j.at("replicate").get<std::size_t>();
  const std::string prefix = j.value("prefix", std::string("c"));
  for (std::size_t i = 0; i < n; ++i) {
    ClusterSpec c = parse_cluster(j);
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%02zu", i);
    c.name = prefix + buf;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

SynthSpec synth_spec_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    SynthSpec s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.dim = j.at("dim").get<std::size_t>();
    s.id_clusters = parse_clusters(j.at("id_clusters"));
    s.ood_sets = parse_clusters(j.at("ood_sets"));
    if (j.contains("agents")) {
      const auto& a = j.at("agents");
      s.agents.count = a.at("count").get<std::size_t>();
      s.agents.concentration = a.value("concentration", 8.0);
      const std::string anchor = a.value("anchor", std::string("ood"));
      if (anchor == "ood") {
        s.agents.anchor = AgentAnchor::kOod;
      } else if (anchor == "id") {
        s.agents.anchor = AgentAnchor::kId;
      } else if (anchor == "random") {
        s.agents.anchor = AgentAnchor::kRandom;
      } else if (anchor == "explicit") {
        s.agents.anchor = AgentAnchor::kExplicit;
        s.agents.directions = a.at("directions").get<std::vector<Embedding>>();
      } else {
        throw Error(ErrorCode::kBadSpec, "unknown agent anchor '" + anchor + "'");
      }
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadSpec, e.what());
  }
}

ExperimentDefaults experiment_defaults_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ExperimentDefaults d;
    d.tau = j.value("tau", d.tau);
    d.k = j.value("k", d.k);
    d.target_tpr = j.value("target_tpr", d.target_tpr);
    return d;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadSpec, e.what());
  }
}

SynthSpec load_synth_spec(const std::filesystem::path& path) { return synth_spec_from_json(read_text_file(path)); }

}  // namespace cma
