// Copyright (c) 2026 The unifyspeech-cpp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "unifyspeech/vq.h"

#include <algorithm>
#include <numeric>

#include "unifyspeech/errors.h"
#include "unifyspeech/ops.h"

namespace unifyspeech {

Codebook::Codebook(ParameterStore& store, std::size_t size, std::size_t dim, Rng& rng) {
  if (size == 0) throw ConfigError("codebook: size must be positive");
  Rng local = rng.Fork("codebook.entries");
  entries_ = store.Register("codebook.entries", NormalInit({size, dim}, 0.1, local));
  usage_.assign(size, 0);
  idle_.assign(size, 0);
}

bool Codebook::InitializeFromRows(const Tensor& rows, Rng& rng) {
  const std::size_t v = size(), d = dim();
  if (rows.rank() != 2 || rows.cols() != d) {
    throw DimensionError("codebook init: rows " + ShapeToString(rows.shape()) +
                         " for entries of width " + std::to_string(d));
  }
  std::span<double> dst = entries_.mutable_data();
  if (rows.rows() < v) {
    for (double& x : dst) x = 0.1 * rng.Normal();
    return false;
  }
  // Partial Fisher-Yates picks V distinct rows.
  std::vector<std::size_t> order(rows.rows());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < v; ++i) {
    const auto j = static_cast<std::size_t>(
        rng.UniformInt(static_cast<std::int64_t>(i), static_cast<std::int64_t>(order.size() - 1)));
    std::swap(order[i], order[j]);
    std::copy_n(rows.data().data() + order[i] * d, d, dst.data() + i * d);
  }
  return true;
}

std::vector<std::size_t> Codebook::EndStep(const std::vector<bool>& used,
                                           const Tensor& recent, std::size_t dead_after,
                                           Rng& rng) {
  std::vector<std::size_t> reseeded;
  const std::size_t d = dim();
  for (std::size_t i = 0; i < size(); ++i) {
    if (i < used.size() && used[i]) {
      idle_[i] = 0;
      continue;
    }
    ++idle_[i];
    if (dead_after > 0 && static_cast<std::size_t>(idle_[i]) >= dead_after &&
        recent.defined() && recent.rows() > 0) {
      const auto r = static_cast<std::size_t>(
          rng.UniformInt(0, static_cast<std::int64_t>(recent.rows() - 1)));
      std::copy_n(recent.data().data() + r * d, d, entries_.mutable_data().data() + i * d);
      idle_[i] = 0;
      reseeded.push_back(i);
    }
  }
  return reseeded;
}

std::vector<int> NearestCodes(const Tensor& content, const Tensor& entries) {
  if (entries.rank() != 2 || entries.rows() == 0) {
    throw ConfigError("vq_lookup: empty codebook");
  }
  if (content.rank() != 2 || content.cols() != entries.cols()) {
    throw DimensionError("vq_lookup: content " + ShapeToString(content.shape()) +
                         " vs codebook " + ShapeToString(entries.shape()));
  }
  const std::size_t t = content.rows(), v = entries.rows(), d = entries.cols();
  const double* c = content.data().data();
  const double* e = entries.data().data();
  std::vector<int> codes(t);
  for (std::size_t r = 0; r < t; ++r) {
    double best = 0.0;
    int best_index = 0;
    for (std::size_t j = 0; j < v; ++j) {
      double dist = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = c[r * d + k] - e[j * d + k];
        dist += diff * diff;
      }
      // Strict comparison keeps the lowest index on ties.
      if (j == 0 || dist < best) {
        best = dist;
        best_index = static_cast<int>(j);
      }
    }
    codes[r] = best_index;
  }
  return codes;
}

QuantizedContent VqLookup(const Tensor& content, const Codebook& book) {
  QuantizedContent q;
  q.codes = NearestCodes(content, book.entries());
  Tensor selected = [&] {
    NoGradGuard no_grad;
    return GatherRows(book.entries(), q.codes);
  }();
  q.vectors = StraightThrough(content, selected);
  q.continuous = content;
  q.source = &book;
  return q;
}

QuantizedContent VqLookup(const Tensor& content, Codebook& book, bool count_usage) {
  QuantizedContent q = VqLookup(content, static_cast<const Codebook&>(book));
  if (count_usage) {
    for (int code : q.codes) ++book.mutable_usage()[static_cast<std::size_t>(code)];
  }
  return q;
}

QuantizedContent IdentityQuantize(const Tensor& content) {
  QuantizedContent q;
  q.vectors = content;
  q.continuous = content;
  q.source = nullptr;
  return q;
}

Tensor PairLoss(const QuantizedContent& qp, const QuantizedContent& qs) {
  if (qp.length() != qs.length()) {
    throw PairingError("pair_loss: text content has " + std::to_string(qp.length()) +
                       " frames, speech content has " + std::to_string(qs.length()));
  }
  return Mse(qp.vectors, qs.vectors);
}

Tensor VqAuxLoss(const QuantizedContent& q, double beta) {
  if (q.source == nullptr) return Tensor::Scalar(0.0);
  Tensor selected = GatherRows(q.source->entries(), q.codes);
  Tensor codebook_term = Mse(StopGradient(q.continuous), selected);
  if (beta == 0.0) return codebook_term;
  Tensor commitment = Mse(q.continuous, StopGradient(selected));
  return Add(codebook_term, Scale(commitment, beta));
}

}  // namespace unifyspeech
