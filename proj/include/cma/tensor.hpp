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

// Dense float embeddings and cosine similarity.
//
// Dot products accumulate in double in ascending component order and are
// stored back as float, so results do not depend on how rows are scheduled
// across threads.

#include <cstddef>
#include <span>
#include <vector>

namespace cma {

using Embedding = std::vector<float>;

// Row-major n x d block of float embeddings. Zero rows are allowed (an empty
// agent set); operations that need data reject them with kEmptyInput.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  // Throws kBadParams if dim < 2, kLengthMismatch if data.size() != rows*dim,
  // kNonFinite on NaN/Inf.
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data);

  static EmbeddingMatrix from_rows(const std::vector<Embedding>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<const float> data() const noexcept { return data_; }

  // Copy of the selected rows, in the order given.
  EmbeddingMatrix select(std::span<const std::size_t> indices) const;
  // Rows of *this followed by rows of other. Dims must match unless one side is empty.
  EmbeddingMatrix concat(const EmbeddingMatrix& other) const;

  bool operator==(const EmbeddingMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

// Row-major n x m similarity block.
struct SimilarityMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;

  float at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

// A vector whose norm is already within this distance of 1 is returned
// unchanged, which makes l2_normalize idempotent bitwise.
inline constexpr double kUnitNormSlack = 4.8e-7;
inline constexpr double kMinNorm = 1e-12;

double l2_norm(std::span<const float> v);

// Throws kZeroNorm below kMinNorm, kNonFinite on NaN/Inf.
Embedding l2_normalize(std::span<const float> v);

// Every row normalized; same error contract as l2_normalize.
EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m);

// Dot product of unit vectors clamped to [-1, 1]. Throws kDimMismatch.
float cosine_sim(std::span<const float> u, std::span<const float> v);

// Throws kEmptyInput when either side has no rows, kDimMismatch on dim mismatch.
SimilarityMatrix sim_matrix(const EmbeddingMatrix& images, const EmbeddingMatrix& concepts,
                            unsigned workers = 1);

}  // namespace cma
