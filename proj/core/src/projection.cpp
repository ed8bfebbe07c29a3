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

#include "modguard/projection.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "modguard/error.hpp"
#include "modguard/random.hpp"

namespace modguard::projection {
namespace {

constexpr std::string_view kModule = "projection";
constexpr int kNegativeSamples = 5;
constexpr double kGradClip = 4.0;

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Matrix to_matrix(const embedding::EmbeddingStore& store) {
  Matrix m(store.count(), store.dim());
  for (std::size_t i = 0; i < store.count(); ++i) {
    const auto r = store.row(i);
    for (std::size_t d = 0; d < store.dim(); ++d) m(i, d) = r[d];
  }
  return m;
}

// Runs body(begin, end) over [0, n) on the available hardware threads.
template <typename Body>
void parallel_for(std::size_t n, Body body) {
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(n / 64, 1));
  if (workers == 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> threads;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin < end) threads.emplace_back([=] { body(begin, end); });
  }
  for (auto& t : threads) t.join();
}

double clip(double v) { return std::clamp(v, -kGradClip, kGradClip); }

}  // namespace

void ProjectionConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidInput, kModule, what); };
  if (target_dim != 2 && target_dim != 3) fail("target_dim must be 2 or 3");
  if (n_neighbors < 1) fail("n_neighbors must be positive");
  if (!(min_dist >= 0.0) || !std::isfinite(min_dist)) fail("min_dist must be >= 0");
  if (epochs < 1) fail("epochs must be positive");
}

Projection pca(const embedding::EmbeddingStore& store, int d) {
  if (store.count() < 2) {
    throw Error(ErrorKind::kDegenerateInput, kModule, "pca needs at least 2 points");
  }
  if (d < 1 || static_cast<std::size_t>(d) > store.dim()) {
    throw Error(ErrorKind::kInvalidInput, kModule,
                "pca target dim " + std::to_string(d) + " outside [1, " +
                    std::to_string(store.dim()) + "]");
  }
  const auto n = static_cast<Eigen::Index>(store.count());
  const auto dim = static_cast<Eigen::Index>(store.dim());
  Matrix x = to_matrix(store);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;

  // Components as columns of `v` (dim x d) and their eigenvalues.
  Eigen::MatrixXd v(dim, d);
  Eigen::VectorXd lambda(d);
  double trace = 0.0;
  if (n > dim) {
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    trace = cov.trace();
    for (int c = 0; c < d; ++c) {
      v.col(c) = solver.eigenvectors().col(dim - 1 - c);
      lambda(c) = std::max(0.0, solver.eigenvalues()(dim - 1 - c));
    }
  } else {
    // Fewer points than dimensions: work with the Gram matrix instead.
    const Eigen::MatrixXd gram = x * x.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    trace = gram.trace() / static_cast<double>(n - 1);
    for (int c = 0; c < d; ++c) {
      const Eigen::Index src = n - 1 - c;
      const double ev = src >= 0 ? std::max(0.0, solver.eigenvalues()(src)) : 0.0;
      lambda(c) = ev / static_cast<double>(n - 1);
      if (ev > 1e-12 * std::max(1.0, gram.trace())) {
        v.col(c) = x.transpose() * solver.eigenvectors().col(src) / std::sqrt(ev);
      } else {
        v.col(c).setZero();
      }
    }
  }
  for (int c = 0; c < d; ++c) {
    Eigen::Index arg = 0;
    v.col(c).cwiseAbs().maxCoeff(&arg);
    if (v(arg, c) < 0) v.col(c) = -v.col(c);
  }

  const Matrix coords = x * v;
  Projection p;
  p.dim = static_cast<std::size_t>(d);
  p.ids = store.ids();
  p.coords.assign(coords.data(), coords.data() + coords.size());
  for (int c = 0; c < d; ++c) {
    p.explained_variance_ratio.push_back(trace > 0.0 ? lambda(c) / trace : 0.0);
  }
  return p;
}

KnnGraph knn_graph(const embedding::EmbeddingStore& store, std::size_t k) {
  const std::size_t n = store.count();
  if (k >= n) {
    throw Error(ErrorKind::kTooFewPoints, kModule,
                std::to_string(n) + " points for " + std::to_string(k) + " neighbours");
  }
  if (k == 0) throw Error(ErrorKind::kInvalidInput, kModule, "k must be positive");
  KnnGraph g;
  g.n = n;
  g.k = k;
  g.indices.resize(n * k);
  g.distances.resize(n * k);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<std::pair<double, std::uint32_t>> row(n - 1);
    for (std::size_t i = begin; i < end; ++i) {
      const auto xi = store.row(i);
      std::size_t m = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        double dot = 0.0;
        const auto xj = store.row(j);
        for (std::size_t d = 0; d < xi.size(); ++d) dot += static_cast<double>(xi[d]) * xj[d];
        row[m++] = {std::max(0.0, 1.0 - dot), static_cast<std::uint32_t>(j)};
      }
      std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end());
      for (std::size_t t = 0; t < k; ++t) {
        g.distances[i * k + t] = row[t].first;
        g.indices[i * k + t] = row[t].second;
      }
    }
  });
  return g;
}

Bandwidths smooth_knn(const KnnGraph& graph, int iterations) {
  const double target = std::log2(static_cast<double>(graph.k));
  double global_mean = 0.0;
  for (double d : graph.distances) global_mean += d;
  global_mean /= static_cast<double>(std::max<std::size_t>(graph.distances.size(), 1));

  Bandwidths bw;
  bw.rho.resize(graph.n);
  bw.sigma.resize(graph.n);
  for (std::size_t i = 0; i < graph.n; ++i) {
    const auto dist = std::span<const double>(graph.distances).subspan(i * graph.k, graph.k);
    const double rho = dist[0];
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double mid = 1.0;
    for (int it = 0; it < iterations; ++it) {
      double psum = 0.0;
      for (double d : dist) psum += std::exp(-std::max(0.0, d - rho) / mid);
      if (psum > target) {
        hi = mid;
        mid = (lo + hi) / 2.0;
      } else {
        lo = mid;
        mid = std::isinf(hi) ? mid * 2.0 : (lo + hi) / 2.0;
      }
    }
    const double mean_i = std::accumulate(dist.begin(), dist.end(), 0.0) / static_cast<double>(dist.size());
    const double floor = 1e-3 * (rho > 0.0 ? mean_i : global_mean);
    bw.rho[i] = rho;
    bw.sigma[i] = std::max(mid, floor);
  }
  return bw;
}

std::vector<Edge> fuzzy_graph(const KnnGraph& graph, const Bandwidths& bw) {
  // Directed memberships keyed by (head, tail).
  std::vector<Edge> directed;
  directed.reserve(graph.n * graph.k);
  for (std::size_t i = 0; i < graph.n; ++i) {
    for (std::size_t t = 0; t < graph.k; ++t) {
      const double d = graph.distances[i * graph.k + t];
      const double w = d - bw.rho[i] <= 0.0 ? 1.0 : std::exp(-(d - bw.rho[i]) / bw.sigma[i]);
      directed.push_back({static_cast<std::uint32_t>(i), graph.indices[i * graph.k + t], w});
    }
  }
  auto key_less = [](const Edge& a, const Edge& b) {
    return a.head != b.head ? a.head < b.head : a.tail < b.tail;
  };
  std::sort(directed.begin(), directed.end(), key_less);

  auto lookup = [&](std::uint32_t head, std::uint32_t tail) {
    const Edge probe{head, tail, 0.0};
    const auto it = std::lower_bound(directed.begin(), directed.end(), probe, key_less);
    return it != directed.end() && it->head == head && it->tail == tail ? it->weight : 0.0;
  };

  std::vector<Edge> sym;
  sym.reserve(2 * directed.size());
  for (const Edge& e : directed) {
    const double back = lookup(e.tail, e.head);
    const double w = e.weight + back - e.weight * back;
    sym.push_back({e.head, e.tail, w});
    // Add the reverse direction only when it is absent from the directed set.
    if (back == 0.0) sym.push_back({e.tail, e.head, w});
  }
  std::sort(sym.begin(), sym.end(), key_less);
  return sym;
}

CurveParams fit_ab(double min_dist, double spread) {
  constexpr int kSamples = 300;
  std::vector<double> xs(kSamples);
  std::vector<double> ys(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    xs[i] = 3.0 * spread * i / (kSamples - 1);
    ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist) / spread);
  }
  auto sse = [&](double a, double b) {
    double s = 0.0;
    for (int i = 0; i < kSamples; ++i) {
      const double f = 1.0 / (1.0 + a * std::pow(xs[i], 2.0 * b));
      s += (f - ys[i]) * (f - ys[i]);
    }
    return s;
  };

  // Levenberg-Marquardt from (1, 1).
  double a = 1.0;
  double b = 1.0;
  double lambda = 1e-3;
  double cost = sse(a, b);
  for (int iter = 0; iter < 500; ++iter) {
    double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, jtr0 = 0.0, jtr1 = 0.0;
    for (int i = 0; i < kSamples; ++i) {
      const double x = xs[i];
      const double u = x > 0.0 ? std::pow(x, 2.0 * b) : 0.0;
      const double denom = 1.0 + a * u;
      const double f = 1.0 / denom;
      const double r = f - ys[i];
      const double da = -u / (denom * denom);
      const double db = x > 0.0 ? -a * u * 2.0 * std::log(x) / (denom * denom) : 0.0;
      jtj00 += da * da;
      jtj01 += da * db;
      jtj11 += db * db;
      jtr0 += da * r;
      jtr1 += db * r;
    }
    bool improved = false;
    while (lambda < 1e12) {
      const double m00 = jtj00 * (1.0 + lambda);
      const double m11 = jtj11 * (1.0 + lambda);
      const double det = m00 * m11 - jtj01 * jtj01;
      const double step_a = -(m11 * jtr0 - jtj01 * jtr1) / det;
      const double step_b = -(m00 * jtr1 - jtj01 * jtr0) / det;
      const double na = a + step_a;
      const double nb = b + step_b;
      const double ncost = na > 0.0 && nb > 0.0 ? sse(na, nb) : std::numeric_limits<double>::infinity();
      if (ncost < cost) {
        const bool converged = std::abs(step_a) <= 1e-14 * (1.0 + std::abs(a)) &&
                               std::abs(step_b) <= 1e-14 * (1.0 + std::abs(b));
        a = na;
        b = nb;
        const double gain = cost - ncost;
        cost = ncost;
        lambda = std::max(lambda / 10.0, 1e-15);
        improved = !converged && gain > 1e-18 * (1.0 + cost);
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return {a, b};
}

std::vector<double> pca_init(const embedding::EmbeddingStore& store, int target_dim) {
  Projection p = pca(store, target_dim);
  double sq = 0.0;
  for (double v : p.coords) sq += v * v;
  const double rms = std::sqrt(sq / static_cast<double>(std::max<std::size_t>(p.coords.size(), 1)));
  if (rms > 0.0) {
    for (double& v : p.coords) v /= rms;
  }
  return std::move(p.coords);
}

void optimize_layout(std::vector<double>& coords, std::size_t n, int dim,
                     std::span<const Edge> edges, const CurveParams& ab, int epochs,
                     std::uint64_t seed) {
  if (edges.empty()) return;
  const auto ud = static_cast<std::size_t>(dim);
  double max_w = 0.0;
  for (const auto& e : edges) max_w = std::max(max_w, e.weight);

  // Edges too weak to be sampled even once are dropped.
  std::vector<std::size_t> live;
  std::vector<double> epochs_per_sample;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].weight >= max_w / epochs && edges[i].weight > 0.0) {
      live.push_back(i);
      epochs_per_sample.push_back(max_w / edges[i].weight);
    }
  }
  std::vector<double> per_negative(epochs_per_sample.size());
  for (std::size_t i = 0; i < per_negative.size(); ++i) {
    per_negative[i] = epochs_per_sample[i] / kNegativeSamples;
  }
  std::vector<double> next_sample = epochs_per_sample;
  std::vector<double> next_negative = per_negative;

  Rng rng(seed);
  const double a = ab.a;
  const double b = ab.b;
  std::vector<double> grad(ud);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double alpha = 1.0 - static_cast<double>(epoch) / epochs;
    const double now = static_cast<double>(epoch);
    for (std::size_t s = 0; s < live.size(); ++s) {
      if (next_sample[s] > now) continue;
      const Edge& e = edges[live[s]];
      double* current = &coords[e.head * ud];
      double* other = &coords[e.tail * ud];

      double dist_sq = 0.0;
      for (std::size_t d = 0; d < ud; ++d) dist_sq += (current[d] - other[d]) * (current[d] - other[d]);
      double coeff = 0.0;
      if (dist_sq > 0.0) {
        coeff = -2.0 * a * b * std::pow(dist_sq, b - 1.0) / (a * std::pow(dist_sq, b) + 1.0);
      }
      for (std::size_t d = 0; d < ud; ++d) {
        const double g = clip(coeff * (current[d] - other[d])) * alpha;
        current[d] += g;
        other[d] -= g;
      }
      next_sample[s] += epochs_per_sample[s];

      const auto n_neg = static_cast<int>((now - next_negative[s]) / per_negative[s]);
      for (int p = 0; p < n_neg; ++p) {
        const std::size_t k = rng.below(n);
        if (k == e.head) continue;
        const double* neg = &coords[k * ud];
        dist_sq = 0.0;
        for (std::size_t d = 0; d < ud; ++d) dist_sq += (current[d] - neg[d]) * (current[d] - neg[d]);
        if (dist_sq > 0.0) {
          coeff = 2.0 * b / ((0.001 + dist_sq) * (a * std::pow(dist_sq, b) + 1.0));
          for (std::size_t d = 0; d < ud; ++d) current[d] += clip(coeff * (current[d] - neg[d])) * alpha;
        } else {
          for (std::size_t d = 0; d < ud; ++d) current[d] += kGradClip * alpha;
        }
      }
      next_negative[s] += n_neg * per_negative[s];
    }
  }
}

Projection umap(const embedding::EmbeddingStore& store, const ProjectionConfig& config) {
  config.validate();
  if (config.n_neighbors >= store.count()) {
    throw Error(ErrorKind::kTooFewPoints, kModule,
                std::to_string(store.count()) + " points for n_neighbors = " +
                    std::to_string(config.n_neighbors));
  }
  const KnnGraph graph = knn_graph(store, config.n_neighbors);
  const Bandwidths bw = smooth_knn(graph);
  const std::vector<Edge> edges = fuzzy_graph(graph, bw);
  const CurveParams ab = fit_ab(config.min_dist);

  Projection p;
  p.dim = static_cast<std::size_t>(config.target_dim);
  p.ids = store.ids();
  p.coords = pca_init(store, config.target_dim);
  optimize_layout(p.coords, store.count(), config.target_dim, edges, ab, config.epochs,
                  mix_seed(config.seed, "umap-layout"));
  for (double v : p.coords) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kDegenerateInput, kModule, "layout diverged");
  }
  return p;
}

double trustworthiness(std::span<const double> high, std::size_t high_dim,
                       std::span<const double> low, std::size_t low_dim, std::size_t k) {
  if (high_dim == 0 || low_dim == 0 || high.size() % high_dim != 0 || low.size() % low_dim != 0 ||
      high.size() / high_dim != low.size() / low_dim) {
    throw Error(ErrorKind::kDimMismatch, kModule, "inputs are not aligned");
  }
  const std::size_t n = high.size() / high_dim;
  const double denom_term = 2.0 * n - 3.0 * k - 1.0;
  if (k < 1 || k >= n || denom_term <= 0.0) {
    throw Error(ErrorKind::kInvalidInput, kModule,
                "k = " + std::to_string(k) + " invalid for " + std::to_string(n) + " points");
  }
  auto sq_dist = [](std::span<const double> m, std::size_t dim, std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double t = m[i * dim + d] - m[j * dim + d];
      s += t * t;
    }
    return s;
  };

  double penalty = 0.0;
  std::vector<std::pair<double, std::size_t>> order(n);
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) order[j] = {j == i ? -1.0 : sq_dist(high, high_dim, i, j), j};
    std::sort(order.begin(), order.end());
    for (std::size_t r = 0; r < n; ++r) rank[order[r].second] = r;  // self has rank 0

    for (std::size_t j = 0; j < n; ++j) order[j] = {j == i ? -1.0 : sq_dist(low, low_dim, i, j), j};
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k + 1), order.end());
    for (std::size_t t = 1; t <= k; ++t) {
      const std::size_t r = rank[order[t].second];
      if (r > k) penalty += static_cast<double>(r - k);
    }
  }
  return 1.0 - penalty * 2.0 / (static_cast<double>(n) * k * denom_term);
}

double trustworthiness(const embedding::EmbeddingStore& x, const Projection& y, std::size_t k) {
  if (x.count() != y.count()) {
    throw Error(ErrorKind::kDimMismatch, kModule,
                std::to_string(x.count()) + " rows vs " + std::to_string(y.count()) + " points");
  }
  std::vector<double> high(x.data().begin(), x.data().end());
  return trustworthiness(high, x.dim(), y.coords, y.dim, k);
}

std::string projection_to_csv(const Projection& projection,
                              const std::vector<std::optional<Label>>* labels,
                              const std::unordered_set<std::string>* highlight) {
  static constexpr const char* kAxes[] = {"x", "y", "z"};
  std::ostringstream out;
  out.precision(17);
  out << "id";
  for (std::size_t d = 0; d < projection.dim; ++d) out << ',' << (d < 3 ? kAxes[d] : "c");
  if (labels) out << ",label";
  if (highlight) out << ",highlight";
  out << '\n';
  for (std::size_t i = 0; i < projection.count(); ++i) {
    const std::string& id = projection.ids[i];
    const bool quote = id.find_first_of(",\"\n\r") != std::string::npos;
    if (quote) {
      out << '"';
      for (char c : id) out << (c == '"' ? "\"\"" : std::string(1, c));
      out << '"';
    } else {
      out << id;
    }
    for (double v : projection.point(i)) out << ',' << v;
    if (labels) {
      out << ',';
      if (i < labels->size() && (*labels)[i]) out << to_int(*(*labels)[i]);
    }
    if (highlight) out << ',' << (highlight->count(id) ? 1 : 0);
    out << '\n';
  }
  return out.str();
}

}  // namespace modguard::projection
