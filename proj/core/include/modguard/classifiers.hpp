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

#ifndef MODGUARD_CLASSIFIERS_HPP_
#define MODGUARD_CLASSIFIERS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "modguard/embedding_store.hpp"
#include "modguard/types.hpp"

namespace modguard::classifiers {

enum class ModelKind { kLogistic, kLinearSvm, kKnn };

std::string_view kind_name(ModelKind kind);
std::optional<ModelKind> kind_from_name(std::string_view name);

struct TrainConfig {
  double learning_rate = 0.1;
  double l2 = 1e-4;
  int epochs = 200;
  std::uint64_t seed = 0;
  std::size_t batch = 64;
  // Weight each example by n / (2 * n_class) so both classes contribute
  // equally to the loss.
  bool class_weighting = false;

  // Throws InvalidInput. `allow_zero_epochs` is used by update_incremental.
  void validate(bool allow_zero_epochs = false) const;
};

struct KnnIndex {
  int k = 1;
  embedding::EmbeddingStore instances{1};  // every row labelled
};

struct ModelMetadata {
  std::uint64_t seed = 0;
  TrainConfig config;
  std::string train_corpus_hash;
  std::size_t train_count = 0;
  // Full-data objective before training and after every epoch.
  std::vector<double> loss_history;
};

struct ClassifierModel {
  static constexpr int kFormatVersion = 1;

  ModelKind kind = ModelKind::kLogistic;
  std::size_t dim = 0;
  std::vector<double> weights;  // empty for knn
  double bias = 0.0;
  // Probability cut-off (logistic), margin cut-off (svm) or vote fraction (knn).
  double threshold = 0.5;
  std::optional<KnnIndex> knn;
  ModelMetadata metadata;

  // Throws FormatError when invariants do not hold.
  void validate() const;
};

double default_threshold(ModelKind kind);

struct Prediction {
  double score = 0.0;
  Label label = Label::kNonHarmful;
};

// Any vector of width model.dim is accepted, regardless of the modality it
// came from. label = harmful iff score >= threshold. Throws DimMismatch.
Prediction predict(const ClassifierModel& model, std::span<const float> x);
std::vector<Prediction> predict_all(const ClassifierModel& model,
                                    const embedding::EmbeddingStore& store);

// Mini-batch gradient descent on the L2-regularised mean log-loss, with a
// seeded shuffle each epoch. An epoch that raises the full objective is
// rolled back and the step halved, so loss_history never increases.
// Throws DegenerateData (fewer than 2 rows or a single class), DimMismatch
// (label count differs) or InvalidInput.
ClassifierModel train_logistic(const embedding::EmbeddingStore& x, std::span<const Label> y,
                               const TrainConfig& config);
// Same loop on the L2-regularised mean hinge loss with labels mapped to +-1.
ClassifierModel train_svm(const embedding::EmbeddingStore& x, std::span<const Label> y,
                          const TrainConfig& config);
// Stores the instances. Throws EvenK, InvalidInput (k out of range), DimMismatch.
ClassifierModel train_knn(const embedding::EmbeddingStore& x, std::span<const Label> y, int k);

// Warm-started fine-tuning of a linear model on x_new plus a seeded reservoir
// sample of 4 * |x_new| rows from `replay`. epochs == 0 returns the model
// unchanged. Throws UnsupportedKind for knn, DimMismatch, InvalidInput.
ClassifierModel update_incremental(const ClassifierModel& model,
                                   const embedding::EmbeddingStore& x_new,
                                   std::span<const Label> y_new,
                                   const embedding::EmbeddingStore& replay,
                                   std::span<const Label> replay_labels,
                                   const TrainConfig& config);

inline constexpr std::size_t kReplayRatio = 4;

// Reservoir sample (algorithm R) of `size` indices from [0, population),
// returned in ascending order.
std::vector<std::size_t> reservoir_sample(std::size_t population, std::size_t size,
                                          std::uint64_t seed);

// Objective value and gradient over a whole data set:
//   mean_i c_i * loss_i(w, b) + l2 / 2 * |w|^2
// where c_i are per-example weights (all 1 when `sample_weights` is empty).
struct Objective {
  double loss = 0.0;
  std::vector<double> grad_w;
  double grad_b = 0.0;
};
Objective logistic_objective(std::span<const double> w, double b,
                             const embedding::EmbeddingStore& x, std::span<const Label> y,
                             std::span<const double> sample_weights, double l2);
// Uses the subgradient 0 at margin exactly 1.
Objective hinge_objective(std::span<const double> w, double b,
                          const embedding::EmbeddingStore& x, std::span<const Label> y,
                          std::span<const double> sample_weights, double l2);

std::vector<double> class_weights(std::span<const Label> y);
std::string corpus_hash(const embedding::EmbeddingStore& x, std::span<const Label> y);

std::string model_to_json(const ClassifierModel& model);
ClassifierModel model_from_json(std::string_view json);
void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

}  // namespace modguard::classifiers

#endif  // MODGUARD_CLASSIFIERS_HPP_
