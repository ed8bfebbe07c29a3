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

#ifndef MODGUARD_METRICS_HPP_
#define MODGUARD_METRICS_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "modguard/classifiers.hpp"
#include "modguard/embedding_store.hpp"
#include "modguard/types.hpp"

namespace modguard::metrics {

// Label 1 (harmful) is the positive class throughout.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Throws LengthMismatch for unequal or empty inputs.
ConfusionCounts confusion(std::span<const Label> labels, std::span<const Label> preds);

struct Prf1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when the corresponding denominator is zero and the value is the
  // conventional 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

// f1 is evaluated as 2tp / (2tp + fp + fn), which equals 2pr / (p + r)
// whenever both are defined and needs only one rounding.
Prf1 prf1(const ConfusionCounts& counts);

double accuracy(const ConfusionCounts& counts);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocResult {
  std::vector<RocPoint> roc;  // (0,0) first, (1,1) last
  double auc = 0.0;
};

// Sweeps thresholds over the distinct scores in descending order; equal scores
// form one step, so ties contribute one half. Throws SingleClass,
// LengthMismatch, or InvalidInput for non-finite scores.
RocResult roc_auc(std::span<const double> scores, std::span<const Label> labels);

struct EvaluationReport {
  ConfusionCounts counts;
  Prf1 prf;
  double accuracy = 0.0;
  RocResult roc;
};

EvaluationReport evaluate(const classifiers::ClassifierModel& model,
                          const embedding::EmbeddingStore& store, std::span<const Label> labels);
// Same composition from precomputed predictions.
EvaluationReport evaluate_predictions(std::span<const classifiers::Prediction> predictions,
                                      std::span<const Label> labels);

// {counts, precision, recall, f1, accuracy, auc, roc:[[fpr,tpr],...]}
std::string report_to_json(const EvaluationReport& report);
// Header "fpr,tpr" then one point per line.
std::string roc_to_csv(const RocResult& roc);

}  // namespace modguard::metrics

#endif  // MODGUARD_METRICS_HPP_
