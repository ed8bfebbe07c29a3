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

#include "modguard/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "modguard/error.hpp"

namespace modguard::metrics {
namespace {

constexpr std::string_view kModule = "metrics";

double ratio(std::uint64_t num, std::uint64_t den) {
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string shortest(double v) {
  // nlohmann prints the shortest round-tripping representation.
  return nlohmann::json(v).dump();
}

}  // namespace

ConfusionCounts confusion(std::span<const Label> labels, std::span<const Label> preds) {
  if (labels.size() != preds.size() || labels.empty()) {
    throw Error(ErrorKind::kLengthMismatch, kModule,
                std::to_string(labels.size()) + " labels vs " + std::to_string(preds.size()) +
                    " predictions");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool actual = labels[i] == Label::kHarmful;
    const bool predicted = preds[i] == Label::kHarmful;
    if (actual && predicted) ++c.tp;
    else if (actual) ++c.fn;
    else if (predicted) ++c.fp;
    else ++c.tn;
  }
  return c;
}

Prf1 prf1(const ConfusionCounts& c) {
  Prf1 r;
  if (c.tp + c.fp == 0) r.precision_undefined = true;
  else r.precision = ratio(c.tp, c.tp + c.fp);
  if (c.tp + c.fn == 0) r.recall_undefined = true;
  else r.recall = ratio(c.tp, c.tp + c.fn);
  // p + r is zero exactly when tp is zero.
  if (c.tp == 0) r.f1_undefined = true;
  else r.f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
  return r;
}

double accuracy(const ConfusionCounts& c) {
  return c.total() == 0 ? 0.0 : ratio(c.tp + c.tn, c.total());
}

RocResult roc_auc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::kLengthMismatch, kModule,
                std::to_string(scores.size()) + " scores vs " + std::to_string(labels.size()) +
                    " labels");
  }
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw Error(ErrorKind::kInvalidInput, kModule, "non-finite score", i);
    }
    if (labels[i] == Label::kHarmful) ++pos;
  }
  const std::uint64_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) {
    throw Error(ErrorKind::kSingleClass, kModule, "roc needs both classes present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocResult out;
  out.roc.push_back({0.0, 0.0});
  // Twice the area times pos*neg, accumulated exactly in integers.
  std::uint64_t area2 = 0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::uint64_t dtp = 0;
    std::uint64_t dfp = 0;
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) {
      if (labels[order[i]] == Label::kHarmful) ++dtp;
      else ++dfp;
    }
    area2 += dfp * (2 * tp + dtp);
    tp += dtp;
    fp += dfp;
    out.roc.push_back({ratio(fp, neg), ratio(tp, pos)});
  }
  out.auc = static_cast<double>(area2) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return out;
}

EvaluationReport evaluate_predictions(std::span<const classifiers::Prediction> predictions,
                                      std::span<const Label> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorKind::kLengthMismatch, kModule,
                std::to_string(predictions.size()) + " predictions vs " +
                    std::to_string(labels.size()) + " labels");
  }
  std::vector<Label> preds;
  std::vector<double> scores;
  preds.reserve(predictions.size());
  scores.reserve(predictions.size());
  for (const auto& p : predictions) {
    preds.push_back(p.label);
    scores.push_back(p.score);
  }
  EvaluationReport report;
  report.counts = confusion(labels, preds);
  report.prf = prf1(report.counts);
  report.accuracy = accuracy(report.counts);
  report.roc = roc_auc(scores, labels);
  return report;
}

EvaluationReport evaluate(const classifiers::ClassifierModel& model,
                          const embedding::EmbeddingStore& store, std::span<const Label> labels) {
  if (store.count() != labels.size()) {
    throw Error(ErrorKind::kLengthMismatch, kModule,
                std::to_string(store.count()) + " rows vs " + std::to_string(labels.size()) +
                    " labels");
  }
  const auto predictions = classifiers::predict_all(model, store);
  return evaluate_predictions(predictions, labels);
}

std::string report_to_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["counts"] = {{"tp", report.counts.tp},
                 {"fp", report.counts.fp},
                 {"tn", report.counts.tn},
                 {"fn", report.counts.fn}};
  j["precision"] = report.prf.precision;
  j["recall"] = report.prf.recall;
  j["f1"] = report.prf.f1;
  j["accuracy"] = report.accuracy;
  j["auc"] = report.roc.auc;
  auto roc = nlohmann::ordered_json::array();
  for (const auto& p : report.roc.roc) roc.push_back({p.fpr, p.tpr});
  j["roc"] = std::move(roc);
  j["undefined"] = {{"precision", report.prf.precision_undefined},
                    {"recall", report.prf.recall_undefined},
                    {"f1", report.prf.f1_undefined}};
  return j.dump(2);
}

std::string roc_to_csv(const RocResult& roc) {
  std::ostringstream out;
  out << "fpr,tpr\n";
  for (const auto& p : roc.roc) out << shortest(p.fpr) << ',' << shortest(p.tpr) << '\n';
  return out.str();
}

}  // namespace modguard::metrics
