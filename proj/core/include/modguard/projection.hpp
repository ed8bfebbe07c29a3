/* Copyright 2026 The modguard Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef MODGUARD_PROJECTION_HPP_
#define MODGUARD_PROJECTION_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "modguard/embedding_store.hpp"

namespace modguard::projection {

struct ProjectionConfig {
  int target_dim = 3;
  std::size_t n_neighbors = 15;
  double min_dist = 0.1;
  int epochs = 200;
  std::uint64_t seed = 0;

  // Throws InvalidInput; the n_neighbors < count check happens in umap().
  void validate() const;
};

// count x dim coordinates, row-major, aligned with `ids`.
struct Projection {
  std::size_t dim = 0;
  std::vector<std::string> ids;
  std::vector<double> coords;
  // Filled by pca() only.
  std::vector<double> explained_variance_ratio;

  std::size_t count() const noexcept { return ids.size(); }
  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(coords).subspan(i * dim, dim);
  }
};

// Principal components of the mean-centred rows, in descending eigenvalue
// order, each oriented so its largest-magnitude loading is positive.
// Throws DegenerateInput (count < 2) or InvalidInput (d outside [1, dim]).
Projection pca(const embedding::EmbeddingStore& store, int d);

// The UMAP stages, exposed individually.

// Exact cosine k-NN excluding the point itself, ties to the lower index.
struct KnnGraph {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::uint32_t> indices;  // n x k, nearest first
  std::vector<double> distances;       // n x k, 1 - cos
};
// Throws TooFewPoints when k >= count.
KnnGraph knn_graph(const embedding::EmbeddingStore& store, std::size_t k);

// Per-point rho (nearest distance) and sigma solving
//   sum_j exp(-max(0, d_ij - rho_i) / sigma_i) = log2(k)
// by bisection.
struct Bandwidths {
  std::vector<double> rho;
  std::vector<double> sigma;
};
Bandwidths smooth_knn(const KnnGraph& graph, int iterations = 64);

struct Edge {
  std::uint32_t head = 0;
  std::uint32_t tail = 0;
  double weight = 0.0;
};
// Directed memberships combined as a + b - ab. Each undirected edge appears
// once per direction; edges are sorted by (head, tail).
std::vector<Edge> fuzzy_graph(const KnnGraph& graph, const Bandwidths& bw);

// (a, b) of the low-dimensional similarity 1 / (1 + a d^(2b)), least-squares
// fitted to the min_dist / spread target curve on 300 points over [0, 3 spread].
struct CurveParams {
  double a = 0.0;
  double b = 0.0;
};
CurveParams fit_ab(double min_dist, double spread = 1.0);

// PCA coordinates rescaled to unit root-mean-square.
std::vector<double> pca_init(const embedding::EmbeddingStore& store, int target_dim);

// Stochastic layout optimisation with 5 negative samples per positive edge
// sample and a learning rate decaying linearly from 1 to 0. Modifies
// `coords` (n x dim) in place.
void optimize_layout(std::vector<double>& coords, std::size_t n, int dim,
                     std::span<const Edge> edges, const CurveParams& ab, int epochs,
                     std::uint64_t seed);

// Full pipeline. Throws TooFewPoints or InvalidInput.
Projection umap(const embedding::EmbeddingStore& store, const ProjectionConfig& config);

// Standard trustworthiness with Euclidean distances in both spaces.
// Throws DimMismatch (counts differ) or InvalidInput (k out of range).
double trustworthiness(const embedding::EmbeddingStore& x, const Projection& y, std::size_t k);
// Same statistic over raw row-major matrices.
double trustworthiness(std::span<const double> high, std::size_t high_dim,
                       std::span<const double> low, std::size_t low_dim, std::size_t k);

// CSV with columns id,x,y[,z][,label][,highlight].
std::string projection_to_csv(const Projection& projection,
                              const std::vector<std::optional<Label>>* labels = nullptr,
                              const std::unordered_set<std::string>* highlight = nullptr);

}  // namespace modguard::projection

#endif  // MODGUARD_PROJECTION_HPP_
