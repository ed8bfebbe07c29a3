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

#include <gtest/gtest.h>

#include <json.hpp>

#include <bit>
#include <cmath>
#include <vector>

#include "modguard/classifiers.hpp"
#include "modguard/error.hpp"
#include "modguard/metrics.hpp"
#include "modguard/random.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"
#include "temp_dir.hpp"

namespace modguard::classifiers {
namespace {

using embedding::EmbeddingStore;
using testing::LabeledStore;

constexpr Label P = Label::kHarmful;
constexpr Label N = Label::kNonHarmful;

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no modguard::Error thrown";
  return ErrorKind::kInvalidInput;
}

LabeledStore separable_pair() {
  LabeledStore d{EmbeddingStore(3), {P, N}};
  d.x.append_row("pos", std::vector<float>{1, 0, 0}, P);
  d.x.append_row("neg", std::vector<float>{-1, 0, 0}, N);
  return d;
}

TEST(TrainLogistic, SeparablePair) {
  const auto d = separable_pair();
  const auto m = train_logistic(d.x, d.y, {});
  EXPECT_GT(m.weights[0], 0.0);
  EXPECT_EQ(predict(m, d.x.row(0)).label, P);
  EXPECT_EQ(predict(m, d.x.row(1)).label, N);
  EXPECT_LE(m.metadata.loss_history.back(), m.metadata.loss_history.front());
}

TEST(TrainSvm, SeparablePair) {
  const auto d = separable_pair();
  const auto m = train_svm(d.x, d.y, {});
  EXPECT_GT(predict(m, d.x.row(0)).score, 0.0);
  EXPECT_LT(predict(m, d.x.row(1)).score, 0.0);
  EXPECT_EQ(m.threshold, 0.0);
}

TEST(Train, Errors) {
  auto d = separable_pair();
  const std::vector<Label> same{P, P};
  EXPECT_EQ(kind_of([&] { train_logistic(d.x, same, {}); }), ErrorKind::kDegenerateData);
  const std::vector<Label> short_labels{P};
  EXPECT_EQ(kind_of([&] { train_svm(d.x, short_labels, {}); }), ErrorKind::kDimMismatch);
  TrainConfig bad;
  bad.learning_rate = 0.0;
  EXPECT_EQ(kind_of([&] { train_logistic(d.x, d.y, bad); }), ErrorKind::kInvalidInput);
  bad = {};
  bad.epochs = 0;
  EXPECT_EQ(kind_of([&] { train_logistic(d.x, d.y, bad); }), ErrorKind::kInvalidInput);
}

TEST(Predict, ZeroModelScoresOneHalf) {
  ClassifierModel m;
  m.dim = 4;
  m.weights.assign(4, 0.0);
  const std::vector<float> x{0.5f, 0.5f, 0.5f, 0.5f};
  const auto p = predict(m, x);
  EXPECT_EQ(p.score, 0.5);
  EXPECT_EQ(p.label, P);
}

TEST(Predict, DimMismatchAndCrossModalShape) {
  ClassifierModel m;
  m.dim = 4;
  m.weights = {1, -1, 0, 0};
  const std::vector<float> wrong{1, 0, 0};
  EXPECT_EQ(kind_of([&] { predict(m, wrong); }), ErrorKind::kDimMismatch);
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto v = testing::random_unit(rng, 4);
    const auto p = predict(m, v);
    EXPECT_GE(p.score, 0.0);
    EXPECT_LE(p.score, 1.0);
  }
}

TEST(Predict, ThresholdOnlyMovesLabels) {
  Rng rng(8);
  const auto d = testing::random_labeled(rng, 60, 8);
  for (auto* train : {&train_logistic, &train_svm}) {
    auto m = train(d.x, d.y, {});
    for (double t : {-0.7, 0.0, 0.25, 0.5, 0.9}) {
      auto moved = m;
      moved.threshold = t;
      for (std::size_t i = 0; i < d.x.count(); ++i) {
        const auto a = predict(m, d.x.row(i));
        const auto b = predict(moved, d.x.row(i));
        ASSERT_EQ(std::bit_cast<std::uint64_t>(a.score), std::bit_cast<std::uint64_t>(b.score));
        ASSERT_EQ(b.label, b.score >= t ? P : N);
      }
    }
  }
}

TEST(Predict, ScoreEqualToThresholdIsHarmful) {
  ClassifierModel m;
  m.kind = ModelKind::kLinearSvm;
  m.dim = 2;
  m.weights = {1.0, 0.0};
  m.threshold = 0.5;
  const std::vector<float> x{0.5f, 0.0f};
  EXPECT_EQ(predict(m, x).label, P);
}

TEST(TrainKnn, NearestIsItself) {
  Rng rng(2);
  const auto d = testing::random_labeled(rng, 30, 6);
  const auto m = train_knn(d.x, d.y, 1);
  for (std::size_t i = 0; i < d.x.count(); ++i) EXPECT_EQ(predict(m, d.x.row(i)).label, d.y[i]);
}

// Query q = e1. Stored: a = (0.9, 0.436) label 1, b = (0.8, -0.6) label 1,
// c = (0.6, 0.8) label 0, d = (-1, 0) label 0. Cosines with q: 0.9, 0.8, 0.6,
// -1, so the 3 nearest are a, b, c and the vote is 2/3 harmful.
TEST(TrainKnn, MajorityOfThree) {
  EmbeddingStore x(2);
  const float ay = static_cast<float>(std::sqrt(1.0 - 0.81));
  x.append_row("a", std::vector<float>{0.9f, ay}, P);
  x.append_row("b", std::vector<float>{0.8f, -0.6f}, P);
  x.append_row("c", std::vector<float>{0.6f, 0.8f}, N);
  x.append_row("d", std::vector<float>{-1.0f, 0.0f}, N);
  const std::vector<Label> y{P, P, N, N};
  const auto m = train_knn(x, y, 3);
  const std::vector<float> q{1.0f, 0.0f};
  const auto p = predict(m, q);
  EXPECT_DOUBLE_EQ(p.score, 2.0 / 3.0);
  EXPECT_EQ(p.label, P);
  const std::vector<float> q2{0.0f, 1.0f};  // nearest: c (0.8), a (0.436), b (-0.6)
  EXPECT_DOUBLE_EQ(predict(m, q2).score, 1.0 / 3.0);
}

TEST(TrainKnn, Errors) {
  const auto d = separable_pair();
  EXPECT_EQ(kind_of([&] { train_knn(d.x, d.y, 2); }), ErrorKind::kEvenK);
  EXPECT_EQ(kind_of([&] { train_knn(d.x, d.y, 3); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([&] { train_knn(d.x, d.y, -1); }), ErrorKind::kInvalidInput);
}

TEST(Gradient, LogisticMatchesFiniteDifferences) {
  Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    const std::size_t dim = 1 + rng.below(32);
    const auto d = testing::random_labeled(rng, 2 + rng.below(20), dim);
    std::vector<double> wb(dim + 1);
    for (auto& v : wb) v = rng.normal();
    const double l2 = rng.uniform() * 0.1;
    const auto weights = class_weights(d.y);
    auto f = [&](std::span<const double> p) {
      return logistic_objective(p.first(dim), p[dim], d.x, d.y, weights, l2).loss;
    };
    const auto obj = logistic_objective(std::span(wb).first(dim), wb[dim], d.x, d.y, weights, l2);
    std::vector<double> analytic = obj.grad_w;
    analytic.push_back(obj.grad_b);
    EXPECT_LT(testing::relative_error(analytic, testing::numeric_gradient(f, wb, 1e-5)), 1e-4);
  }
}

TEST(ClassWeights, BalancesClasses) {
  const std::vector<Label> y{P, N, N, N};
  const auto w = class_weights(y);
  EXPECT_DOUBLE_EQ(w[0], 2.0);
  EXPECT_DOUBLE_EQ(w[1], 4.0 / 6.0);
}

TEST(Determinism, IdenticalWeights) {
  const auto d1 = testing::make_d1(5, 200);
  TrainConfig cfg;
  cfg.seed = 17;
  cfg.epochs = 30;
  for (auto* train : {&train_logistic, &train_svm}) {
    const auto a = train(d1.data.x, d1.data.y, cfg);
    const auto b = train(d1.data.x, d1.data.y, cfg);
    EXPECT_EQ(a.weights, b.weights);
    EXPECT_EQ(a.bias, b.bias);
    EXPECT_EQ(model_to_json(a), model_to_json(b));
  }
  cfg.seed = 18;
  EXPECT_NE(train_logistic(d1.data.x, d1.data.y, cfg).weights,
            train_logistic(d1.data.x, d1.data.y, TrainConfig{.epochs = 30, .seed = 17}).weights);
}

TEST(Monotone, LossNonIncreasingOnSyntheticClusters) {
  const auto d1 = testing::make_d1(1);
  for (auto* train : {&train_logistic, &train_svm}) {
    const auto m = train(d1.data.x, d1.data.y, {});
    const auto& h = m.metadata.loss_history;
    ASSERT_EQ(h.size(), 201u);
    for (std::size_t i = 1; i < h.size(); ++i) ASSERT_LE(h[i], h[i - 1]) << "epoch " << i;
  }
}

TEST(Persistence, RoundTripBitIdentical) {
  testing::TempDir dir;
  Rng rng(12);
  const auto d = testing::random_labeled(rng, 40, 16);
  const std::vector<ClassifierModel> models{train_logistic(d.x, d.y, {}),
                                            train_svm(d.x, d.y, {}), train_knn(d.x, d.y, 5)};
  for (const auto& m : models) {
    save_model(m, dir / "m.json");
    const auto back = load_model(dir / "m.json");
    EXPECT_EQ(model_to_json(back), model_to_json(m));
    for (int i = 0; i < 200; ++i) {
      const auto x = testing::random_unit(rng, 16);
      const auto a = predict(m, x), b = predict(back, x);
      ASSERT_EQ(std::bit_cast<std::uint64_t>(a.score), std::bit_cast<std::uint64_t>(b.score));
      ASSERT_EQ(a.label, b.label);
    }
  }
}

TEST(Persistence, Schema) {
  const auto d = separable_pair();
  TrainConfig cfg;
  cfg.seed = 3;
  const auto j = nlohmann::json::parse(model_to_json(train_logistic(d.x, d.y, cfg)));
  for (const char* key : {"format_version", "kind", "dim", "weights", "bias", "threshold", "metadata"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["kind"], "logistic");
  EXPECT_EQ(j["metadata"]["seed"], 3);
  EXPECT_EQ(j["metadata"]["train_corpus_hash"], corpus_hash(d.x, d.y));
  EXPECT_EQ(j["metadata"]["cfg"]["learning_rate"], 0.1);
}

TEST(Persistence, Errors) {
  testing::TempDir dir;
  EXPECT_EQ(kind_of([&] { load_model(dir / "none.json"); }), ErrorKind::kIoError);
  EXPECT_EQ(kind_of([] { model_from_json("{not json"); }), ErrorKind::kFormatError);
  const auto d = separable_pair();
  auto j = nlohmann::json::parse(model_to_json(train_logistic(d.x, d.y, {})));
  j["weights"].push_back(1.0);
  EXPECT_EQ(kind_of([&] { model_from_json(j.dump()); }), ErrorKind::kFormatError);
  j = nlohmann::json::parse(model_to_json(train_knn(d.x, d.y, 1)));
  j["knn"]["k"] = 2;
  EXPECT_EQ(kind_of([&] { model_from_json(j.dump()); }), ErrorKind::kFormatError);
  EXPECT_TRUE(kind_from_name("svm").has_value());
  EXPECT_FALSE(kind_from_name("forest").has_value());
}

TEST(Reservoir, Properties) {
  for (std::size_t population : {0u, 1u, 5u, 100u, 1000u}) {
    for (std::size_t size : {0u, 1u, 4u, 50u, 2000u}) {
      const auto s = reservoir_sample(population, size, 9);
      ASSERT_EQ(s.size(), std::min(population, size));
      ASSERT_TRUE(std::is_sorted(s.begin(), s.end()));
      ASSERT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
      if (!s.empty()) ASSERT_LT(s.back(), population);
      ASSERT_EQ(s, reservoir_sample(population, size, 9));
    }
  }
  EXPECT_NE(reservoir_sample(1000, 10, 1), reservoir_sample(1000, 10, 2));
}

TEST(Reservoir, RoughlyUniform) {
  std::vector<int> hits(20, 0);
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    for (std::size_t i : reservoir_sample(20, 5, seed)) ++hits[i];
  }
  for (int h : hits) EXPECT_NEAR(h, 1000, 150);
}

TEST(Incremental, ZeroEpochsIsNoOp) {
  const auto d1 = testing::make_d1(2, 100);
  const auto m = train_logistic(d1.data.x, d1.data.y, {});
  TrainConfig cfg;
  cfg.epochs = 0;
  const EmbeddingStore empty(testing::kD1Dim);
  const auto u = update_incremental(m, empty, {}, d1.data.x, d1.data.y, cfg);
  EXPECT_EQ(u.weights, m.weights);
  EXPECT_EQ(u.bias, m.bias);
}

TEST(Incremental, Errors) {
  const auto d = separable_pair();
  const auto knn = train_knn(d.x, d.y, 1);
  EXPECT_EQ(kind_of([&] { update_incremental(knn, d.x, d.y, d.x, d.y, {}); }),
            ErrorKind::kUnsupportedKind);
  const auto m = train_logistic(d.x, d.y, {});
  EmbeddingStore other(4);
  other.append_row("z", std::vector<float>{1, 0, 0, 0});
  const std::vector<Label> y{P};
  EXPECT_EQ(kind_of([&] { update_incremental(m, other, y, d.x, d.y, {}); }),
            ErrorKind::kDimMismatch);
}

TEST(Incremental, DeterministicAndWarmStarted) {
  const auto d1 = testing::make_d1(3, 300);
  TrainConfig cfg;
  cfg.seed = 4;
  const auto m = train_logistic(d1.data.x, d1.data.y, cfg);
  Rng rng(6);
  LabeledStore fresh{EmbeddingStore(testing::kD1Dim), {}};
  testing::sample_cluster(fresh.x, fresh.y, d1.centroids[1], testing::kD1Sigma, 20, P, "new-",
                          rng);
  cfg.epochs = 5;
  const auto a = update_incremental(m, fresh.x, fresh.y, d1.data.x, d1.data.y, cfg);
  const auto b = update_incremental(m, fresh.x, fresh.y, d1.data.x, d1.data.y, cfg);
  EXPECT_EQ(model_to_json(a), model_to_json(b));
  // Starting from the trained optimum, the loss on the combined batch starts
  // low rather than at log 2.
  EXPECT_LT(a.metadata.loss_history.front(), 0.5 * std::log(2.0));
}

// Warm start from a model trained on the old data reaches the cold-start
// loss on the combined data in at most half the epochs.
TEST(Incremental, WarmStartBeatsColdStartInHalfTheEpochs) {
  const auto d1 = testing::make_d1(7, 300);
  const auto [old_part, new_part] = testing::split_store(d1.data, 0.8, 7);
  TrainConfig cfg;
  cfg.seed = 7;
  cfg.epochs = 40;
  const auto old_model = train_logistic(old_part.x, old_part.y, cfg);
  const auto total = testing::concat(old_part, new_part);
  const auto cold = train_logistic(total.x, total.y, cfg);
  TrainConfig half = cfg;
  half.epochs = cfg.epochs / 2;
  const auto warm = update_incremental(old_model, new_part.x, new_part.y, old_part.x, old_part.y,
                                       half);
  const auto loss = [&](const ClassifierModel& m) {
    return logistic_objective(m.weights, m.bias, total.x, total.y, {}, cfg.l2).loss;
  };
  EXPECT_LE(loss(warm), loss(cold));
}

}  // namespace
}  // namespace modguard::classifiers
