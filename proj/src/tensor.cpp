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

#include "cma/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cma/error.hpp"
#include "cma/parallel.hpp"

namespace cma {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kZeroNorm: return "ZeroNorm";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kEmptyBank: return "EmptyBank";
    case ErrorCode::kDuplicateLabel: return "DuplicateLabel";
    case ErrorCode::kInsufficientAgents: return "InsufficientAgents";
    case ErrorCode::kBadTau: return "BadTau";
    case ErrorCode::kBadTpr: return "BadTPR";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kConstantRegressor: return "ConstantRegressor";
    case ErrorCode::kIdMismatch: return "IDMismatch";
    case ErrorCode::kBadParams: return "BadParams";
    case ErrorCode::kBadSpec: return "BadSpec";
    case ErrorCode::kTooFewSets: return "TooFewSets";
    case ErrorCode::kIoError: return "IOError";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kMalformedHeader: return "MalformedHeader";
    case ErrorCode::kTruncatedPayload: return "TruncatedPayload";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

namespace {

void require_finite(std::span<const float> v) {
  for (float x : v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kNonFinite, "embedding has a NaN or Inf component");
  }
}

double dot(std::span<const float> u, std::span<const float> v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += static_cast<double>(u[i]) * static_cast<double>(v[i]);
  return acc;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data)
    : rows_(rows), dim_(dim), data_(std::move(data)) {
  if (dim_ < 2) throw Error(ErrorCode::kBadParams, "embedding dim must be >= 2, got " + std::to_string(dim_));
  if (data_.size() != rows_ * dim_) {
    throw Error(ErrorCode::kLengthMismatch, "expected " + std::to_string(rows_ * dim_) + " values, got " +
                                                std::to_string(data_.size()));
  }
  require_finite(data_);
}

EmbeddingMatrix EmbeddingMatrix::from_rows(const std::vector<Embedding>& rows) {
  if (rows.empty()) throw Error(ErrorCode::kEmptyInput, "no rows");
  const std::size_t dim = rows.front().size();
  std::vector<float> data;
  data.reserve(rows.size() * dim);
  for (const auto& r : rows) {
    if (r.size() != dim) throw Error(ErrorCode::kDimMismatch, "rows have different lengths");
    data.insert(data.end(), r.begin(), r.end());
  }
  return EmbeddingMatrix(rows.size(), dim, std::move(data));
}

EmbeddingMatrix EmbeddingMatrix::select(std::span<const std::size_t> indices) const {
  std::vector<float> data;
  data.reserve(indices.size() * dim_);
  for (std::size_t i : indices) {
    if (i >= rows_) throw Error(ErrorCode::kBadParams, "row index out of range");
    const auto r = row(i);
    data.insert(data.end(), r.begin(), r.end());
  }
  EmbeddingMatrix out;
  out.rows_ = indices.size();
  out.dim_ = dim_;
  out.data_ = std::move(data);
  return out;
}

EmbeddingMatrix EmbeddingMatrix::concat(const EmbeddingMatrix& other) const {
  if (other.empty() && dim_ != 0) return *this;
  if (empty() && dim_ == 0) return other;
  if (other.dim_ != dim_) {
    throw Error(ErrorCode::kDimMismatch,
                "cannot stack dim " + std::to_string(other.dim_) + " under dim " + std::to_string(dim_));
  }
  EmbeddingMatrix out = *this;
  out.rows_ += other.rows_;
  out.data_.insert(out.data_.end(), other.data_.begin(), other.data_.end());
  return out;
}

double l2_norm(std::span<const float> v) { return std::sqrt(dot(v, v)); }

Embedding l2_normalize(std::span<const float> v) {
  require_finite(v);
  const double norm = l2_norm(v);
  if (!(norm >= kMinNorm)) throw Error(ErrorCode::kZeroNorm, "vector norm below 1e-12");
  if (std::abs(norm - 1.0) <= kUnitNormSlack) return Embedding(v.begin(), v.end());
  Embedding out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(static_cast<double>(v[i]) / norm);
  return out;
}

EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m) {
  std::vector<float> data;
  data.reserve(m.data().size());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const Embedding r = l2_normalize(m.row(i));
    data.insert(data.end(), r.begin(), r.end());
  }
  if (m.dim() == 0) return m;
  return EmbeddingMatrix(m.rows(), m.dim(), std::move(data));
}

float cosine_sim(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kDimMismatch,
                "dims " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
  }
  return static_cast<float>(std::clamp(dot(u, v), -1.0, 1.0));
}

SimilarityMatrix sim_matrix(const EmbeddingMatrix& images, const EmbeddingMatrix& concepts, unsigned workers) {
  if (images.empty() || concepts.empty()) throw Error(ErrorCode::kEmptyInput, "similarity of an empty matrix");
  if (images.dim() != concepts.dim()) {
    throw Error(ErrorCode::kDimMismatch, "image dim " + std::to_string(images.dim()) + " vs concept dim " +
                                             std::to_string(concepts.dim()));
  }
  SimilarityMatrix out{images.rows(), concepts.rows(), std::vector<float>(images.rows() * concepts.rows())};
  parallel_for(images.rows(), workers, [&](std::size_t i) {
    const auto img = images.row(i);
    for (std::size_t j = 0; j < concepts.rows(); ++j) out.values[i * out.cols + j] = cosine_sim(img, concepts.row(j));
  });
  return out;
}

}  // namespace cma
