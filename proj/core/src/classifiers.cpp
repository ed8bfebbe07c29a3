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

#include "modguard/classifiers.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "modguard/error.hpp"
#include "modguard/hash.hpp"
#include "modguard/random.hpp"

namespace modguard::classifiers {
namespace {

constexpr std::string_view kModule = "classifiers";
using embedding::EmbeddingStore;

// Rows of one or more stores viewed as a single training matrix.
struct Rows {
  std::size_t dim = 0;
  std::vector<const float*> x;
  std::vector<Label> y;
  std::vector<double> c;  // per-example loss weights

  std::size_t size() const { return x.size(); }
};

Rows rows_of(const EmbeddingStore& store, std::span<const Label> y) {
  Rows r;
  r.dim = store.dim();
  r.x.reserve(store.count());
  for (std::size_t i = 0; i < store.count(); ++i) r.x.push_back(store.row(i).data());
  r.y.assign(y.begin(), y.end());
  return r;
}

double linear(std::span<const double> w, double b, const float* x) {
  double z = b;
  for (std::size_t d = 0; d < w.size(); ++d) z += w[d] * static_cast<double>(x[d]);
  return z;
}

// log(1 + exp(-z)) without overflow.
double log1p_exp_neg(double z) {
  return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double sign_of(Label y) { return y == Label::kHarmful ? 1.0 : -1.0; }

// Data term of the loss for one example and its derivative with respect to
// the linear score z.
struct PointLoss {
  double loss;
  double dz;
};

PointLoss point_loss(ModelKind kind, double z, Label y) {
  if (kind == ModelKind::kLogistic) {
    const double t = sign_of(y);
    // log-loss of label y at score z equals log(1 + exp(-t z)).
    return {log1p_exp_neg(t * z), sigmoid(z) - (y == Label::kHarmful ? 1.0 : 0.0)};
  }
  const double t = sign_of(y);
  const double margin = t * z;
  if (margin < 1.0) return {1.0 - margin, -t};
  return {0.0, 0.0};
}

Objective objective(ModelKind kind, std::span<const double> w, double b, const Rows& rows,
                    std::span<const std::size_t> subset, double l2) {
  Objective out;
  out.grad_w.assign(w.size(), 0.0);
  double total = 0.0;
  for (std::size_t i : subset) {
    const double c = rows.c.empty() ? 1.0 : rows.c[i];
    const auto [loss, dz] = point_loss(kind, linear(w, b, rows.x[i]), rows.y[i]);
    total += c * loss;
    if (dz != 0.0) {
      const float* x = rows.x[i];
      for (std::size_t d = 0; d < w.size(); ++d) out.grad_w[d] += c * dz * static_cast<double>(x[d]);
      out.grad_b += c * dz;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(subset.size());
  double sq = 0.0;
  for (std::size_t d = 0; d < w.size(); ++d) {
    out.grad_w[d] = out.grad_w[d] * inv_n + l2 * w[d];
    sq += w[d] * w[d];
  }
  out.grad_b *= inv_n;
  out.loss = total * inv_n + 0.5 * l2 * sq;
  return out;
}

Objective full_objective(ModelKind kind, std::span<const double> w, double b, const Rows& rows,
                         double l2) {
  std::vector<std::size_t> all(rows.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return objective(kind, w, b, rows, all, l2);
}

void check_training_data(const EmbeddingStore& x, std::span<const Label> y) {
  if (x.count() != y.size()) {
    throw Error(ErrorKind::kDimMismatch, kModule,
                std::to_string(x.count()) + " rows but " + std::to_string(y.size()) + " labels");
  }
  if (x.count() < 2) throw Error(ErrorKind::kDegenerateData, kModule, "need at least 2 examples");
  const auto positives = std::count(y.begin(), y.end(), Label::kHarmful);
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(y.size())) {
    throw Error(ErrorKind::kDegenerateData, kModule, "training data holds a single class");
  }
}

// Mini-batch gradient descent from (w, b). Appends the full objective after
// every epoch to `history`.
void descend(ModelKind kind, std::vector<double>& w, double& b, const Rows& rows,
             const TrainConfig& config, std::vector<double>& history) {
  Rng rng(mix_seed(config.seed, "train-shuffle"));
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  double rate = config.learning_rate;
  double current = history.back();  // the starting objective
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const std::vector<double> saved_w = w;
    const double saved_b = b;
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch) {
      const std::size_t n = std::min(config.batch, order.size() - begin);
      const auto g = objective(kind, w, b, rows, std::span(order).subspan(begin, n), config.l2);
      for (std::size_t d = 0; d < w.size(); ++d) w[d] -= rate * g.grad_w[d];
      b -= rate * g.grad_b;
    }
    // Near the optimum, fixed-step mini-batch updates can overshoot, the
    // hinge subgradient especially. An epoch that raises the full objective
    // is undone and the step halved.
    const double next = full_objective(kind, w, b, rows, config.l2).loss;
    if (next > current) {
      w = saved_w;
      b = saved_b;
      rate *= 0.5;
    } else {
      current = next;
    }
    history.push_back(current);
  }
}

ClassifierModel train_linear(ModelKind kind, const EmbeddingStore& x, std::span<const Label> y,
                             const TrainConfig& config) {
  config.validate();
  check_training_data(x, y);
  Rows rows = rows_of(x, y);
  if (config.class_weighting) rows.c = class_weights(y);

  ClassifierModel model;
  model.kind = kind;
  model.dim = x.dim();
  model.weights.assign(x.dim(), 0.0);
  model.threshold = default_threshold(kind);
  model.metadata.seed = config.seed;
  model.metadata.config = config;
  model.metadata.train_corpus_hash = corpus_hash(x, y);
  model.metadata.train_count = x.count();
  model.metadata.loss_history.push_back(
      full_objective(kind, model.weights, model.bias, rows, config.l2).loss);
  descend(kind, model.weights, model.bias, rows, config, model.metadata.loss_history);
  return model;
}

Objective store_objective(ModelKind kind, std::span<const double> w, double b,
                          const EmbeddingStore& x, std::span<const Label> y,
                          std::span<const double> sample_weights, double l2) {
  if (x.count() != y.size() || (!sample_weights.empty() && sample_weights.size() != y.size())) {
    throw Error(ErrorKind::kDimMismatch, kModule, "rows, labels and weights differ in length");
  }
  if (w.size() != x.dim()) throw Error(ErrorKind::kDimMismatch, kModule, "weight width differs from dim");
  if (x.empty()) throw Error(ErrorKind::kInvalidInput, kModule, "objective over no rows");
  Rows rows = rows_of(x, y);
  rows.c.assign(sample_weights.begin(), sample_weights.end());
  return full_objective(kind, w, b, rows, l2);
}

Error invalid_model(const std::string& what) {
  return Error(ErrorKind::kFormatError, kModule, what);
}

}  // namespace

std::string_view kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLogistic: return "logistic";
    case ModelKind::kLinearSvm: return "linear_svm";
    case ModelKind::kKnn: return "knn";
  }
  return "unknown";
}

std::optional<ModelKind> kind_from_name(std::string_view name) {
  if (name == "logistic" || name == "logreg") return ModelKind::kLogistic;
  if (name == "linear_svm" || name == "svm") return ModelKind::kLinearSvm;
  if (name == "knn") return ModelKind::kKnn;
  return std::nullopt;
}

double default_threshold(ModelKind kind) { return kind == ModelKind::kLinearSvm ? 0.0 : 0.5; }

void TrainConfig::validate(bool allow_zero_epochs) const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidInput, kModule, what); };
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be positive");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) fail("l2 must be non-negative");
  if (epochs < 0 || (epochs == 0 && !allow_zero_epochs)) fail("epochs must be positive");
  if (batch == 0) fail("batch must be positive");
}

void ClassifierModel::validate() const {
  if (dim == 0) throw invalid_model("dim must be positive");
  if (!std::isfinite(threshold) || !std::isfinite(bias)) throw invalid_model("non-finite threshold or bias");
  if (kind == ModelKind::kLogistic && !(threshold > 0.0 && threshold < 1.0)) {
    throw invalid_model("logistic threshold must lie in (0, 1)");
  }
  if (kind == ModelKind::kKnn) {
    if (!knn) throw invalid_model("knn model without instances");
    if (knn->k < 1 || knn->k % 2 == 0) throw invalid_model("knn k must be odd and >= 1");
    if (static_cast<std::size_t>(knn->k) > knn->instances.count()) throw invalid_model("knn k exceeds instance count");
    if (knn->instances.dim() != dim) throw invalid_model("knn instance dim differs from model dim");
    if (!knn->instances.fully_labeled()) throw invalid_model("knn instances must all be labelled");
  } else {
    if (weights.size() != dim) throw invalid_model("weights length differs from dim");
    for (double v : weights) {
      if (!std::isfinite(v)) throw invalid_model("non-finite weight");
    }
  }
}

Prediction predict(const ClassifierModel& model, std::span<const float> x) {
  if (x.size() != model.dim) {
    throw Error(ErrorKind::kDimMismatch, kModule,
                "input of width " + std::to_string(x.size()) + " for model of dim " +
                    std::to_string(model.dim));
  }
  Prediction p;
  switch (model.kind) {
    case ModelKind::kLogistic:
      p.score = sigmoid(linear(model.weights, model.bias, x.data()));
      break;
    case ModelKind::kLinearSvm:
      p.score = linear(model.weights, model.bias, x.data());
      break;
    case ModelKind::kKnn: {
      const auto& store = model.knn->instances;
      std::vector<std::pair<double, std::size_t>> sims(store.count());
      for (std::size_t i = 0; i < store.count(); ++i) {
        // Instances are unit-norm, so the dot product orders by cosine.
        sims[i] = {-embedding::dot(store.row(i), x), i};
      }
      const auto k = static_cast<std::size_t>(model.knn->k);
      std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), sims.end());
      std::size_t votes = 0;
      for (std::size_t n = 0; n < k; ++n) {
        if (store.labels()[sims[n].second] == Label::kHarmful) ++votes;
      }
      p.score = static_cast<double>(votes) / static_cast<double>(k);
      break;
    }
  }
  p.label = p.score >= model.threshold ? Label::kHarmful : Label::kNonHarmful;
  return p;
}

std::vector<Prediction> predict_all(const ClassifierModel& model, const EmbeddingStore& store) {
  std::vector<Prediction> out;
  out.reserve(store.count());
  for (std::size_t i = 0; i < store.count(); ++i) out.push_back(predict(model, store.row(i)));
  return out;
}

ClassifierModel train_logistic(const EmbeddingStore& x, std::span<const Label> y,
                               const TrainConfig& config) {
  return train_linear(ModelKind::kLogistic, x, y, config);
}

ClassifierModel train_svm(const EmbeddingStore& x, std::span<const Label> y,
                          const TrainConfig& config) {
  return train_linear(ModelKind::kLinearSvm, x, y, config);
}

ClassifierModel train_knn(const EmbeddingStore& x, std::span<const Label> y, int k) {
  if (x.count() != y.size()) {
    throw Error(ErrorKind::kDimMismatch, kModule,
                std::to_string(x.count()) + " rows but " + std::to_string(y.size()) + " labels");
  }
  if (k % 2 == 0) throw Error(ErrorKind::kEvenK, kModule, "k must be odd, got " + std::to_string(k));
  if (k < 1 || static_cast<std::size_t>(k) > x.count()) {
    throw Error(ErrorKind::kInvalidInput, kModule,
                "k = " + std::to_string(k) + " outside [1, " + std::to_string(x.count()) + "]");
  }
  ClassifierModel model;
  model.kind = ModelKind::kKnn;
  model.dim = x.dim();
  model.threshold = default_threshold(ModelKind::kKnn);
  KnnIndex index;
  index.k = k;
  index.instances = EmbeddingStore(x.dim());
  for (std::size_t i = 0; i < x.count(); ++i) index.instances.append_row(x.ids()[i], x.row(i), y[i]);
  model.knn = std::move(index);
  model.metadata.train_corpus_hash = corpus_hash(x, y);
  model.metadata.train_count = x.count();
  return model;
}

std::vector<std::size_t> reservoir_sample(std::size_t population, std::size_t size,
                                          std::uint64_t seed) {
  size = std::min(size, population);
  std::vector<std::size_t> reservoir(size);
  std::iota(reservoir.begin(), reservoir.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = size; i < population; ++i) {
    const std::size_t j = rng.below(i + 1);
    if (j < size) reservoir[j] = i;
  }
  std::sort(reservoir.begin(), reservoir.end());
  return reservoir;
}

ClassifierModel update_incremental(const ClassifierModel& model, const EmbeddingStore& x_new,
                                   std::span<const Label> y_new, const EmbeddingStore& replay,
                                   std::span<const Label> replay_labels,
                                   const TrainConfig& config) {
  if (model.kind == ModelKind::kKnn) {
    throw Error(ErrorKind::kUnsupportedKind, kModule, "incremental update needs a linear model");
  }
  config.validate(/*allow_zero_epochs=*/true);
  if (x_new.dim() != model.dim || (!replay.empty() && replay.dim() != model.dim)) {
    throw Error(ErrorKind::kDimMismatch, kModule, "update data dim differs from model dim");
  }
  if (x_new.count() != y_new.size() || replay.count() != replay_labels.size()) {
    throw Error(ErrorKind::kDimMismatch, kModule, "rows and labels differ in length");
  }
  if (config.epochs == 0) return model;
  if (x_new.empty()) throw Error(ErrorKind::kInvalidInput, kModule, "no new examples");

  Rows rows = rows_of(x_new, y_new);
  const auto picked = reservoir_sample(replay.count(), kReplayRatio * x_new.count(),
                                       mix_seed(config.seed, "replay"));
  for (std::size_t i : picked) {
    rows.x.push_back(replay.row(i).data());
    rows.y.push_back(replay_labels[i]);
  }
  if (config.class_weighting) rows.c = class_weights(rows.y);

  ClassifierModel updated = model;
  updated.metadata.seed = config.seed;
  updated.metadata.config = config;
  updated.metadata.train_count = rows.size();
  {
    Sha256 h;
    h.update(model.metadata.train_corpus_hash);
    h.update(corpus_hash(x_new, y_new));
    updated.metadata.train_corpus_hash = h.hex_digest();
  }
  updated.metadata.loss_history.assign(
      1, full_objective(model.kind, updated.weights, updated.bias, rows, config.l2).loss);
  descend(model.kind, updated.weights, updated.bias, rows, config, updated.metadata.loss_history);
  return updated;
}

Objective logistic_objective(std::span<const double> w, double b, const EmbeddingStore& x,
                             std::span<const Label> y, std::span<const double> sample_weights,
                             double l2) {
  return store_objective(ModelKind::kLogistic, w, b, x, y, sample_weights, l2);
}

Objective hinge_objective(std::span<const double> w, double b, const EmbeddingStore& x,
                          std::span<const Label> y, std::span<const double> sample_weights,
                          double l2) {
  return store_objective(ModelKind::kLinearSvm, w, b, x, y, sample_weights, l2);
}

std::vector<double> class_weights(std::span<const Label> y) {
  const auto n = static_cast<double>(y.size());
  const auto positives = static_cast<double>(std::count(y.begin(), y.end(), Label::kHarmful));
  const double negatives = n - positives;
  std::vector<double> c(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double n_c = y[i] == Label::kHarmful ? positives : negatives;
    c[i] = n / (2.0 * n_c);
  }
  return c;
}

std::string corpus_hash(const EmbeddingStore& x, std::span<const Label> y) {
  Sha256 h;
  h.update(std::to_string(x.dim()) + ":" + std::to_string(x.count()) + ":");
  std::string bytes;
  bytes.reserve(x.data().size() * 4);
  for (float v : x.data()) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int k = 0; k < 4; ++k) bytes.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
  }
  h.update(bytes);
  std::string labels;
  for (Label l : y) labels.push_back(static_cast<char>('0' + to_int(l)));
  h.update(labels);
  return h.hex_digest();
}

std::string model_to_json(const ClassifierModel& model) {
  nlohmann::json j;
  j["format_version"] = ClassifierModel::kFormatVersion;
  j["kind"] = kind_name(model.kind);
  j["dim"] = model.dim;
  j["weights"] = model.weights;
  j["bias"] = model.bias;
  j["threshold"] = model.threshold;
  if (model.knn) {
    const auto& store = model.knn->instances;
    nlohmann::json rows = nlohmann::json::array();
    std::vector<int> labels;
    for (std::size_t i = 0; i < store.count(); ++i) {
      const auto r = store.row(i);
      rows.push_back(std::vector<float>(r.begin(), r.end()));
      labels.push_back(to_int(*store.labels()[i]));
    }
    j["knn"] = {{"k", model.knn->k}, {"ids", store.ids()}, {"labels", labels}, {"rows", rows}};
  }
  const auto& cfg = model.metadata.config;
  j["metadata"] = {
      {"seed", model.metadata.seed},
      {"cfg",
       {{"learning_rate", cfg.learning_rate},
        {"l2", cfg.l2},
        {"epochs", cfg.epochs},
        {"seed", cfg.seed},
        {"batch", cfg.batch},
        {"class_weighting", cfg.class_weighting}}},
      {"train_corpus_hash", model.metadata.train_corpus_hash},
      {"train_count", model.metadata.train_count},
      {"loss_history", model.metadata.loss_history},
  };
  return j.dump(2);
}

ClassifierModel model_from_json(std::string_view text) {
  ClassifierModel model;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format_version").get<int>() != ClassifierModel::kFormatVersion) {
      throw invalid_model("unsupported format_version");
    }
    const auto kind = kind_from_name(j.at("kind").get<std::string>());
    if (!kind) throw invalid_model("unknown model kind");
    model.kind = *kind;
    model.dim = j.at("dim").get<std::size_t>();
    model.weights = j.at("weights").get<std::vector<double>>();
    model.bias = j.at("bias").get<double>();
    model.threshold = j.at("threshold").get<double>();
    if (j.contains("knn") && !j["knn"].is_null()) {
      const auto& k = j["knn"];
      KnnIndex index;
      index.k = k.at("k").get<int>();
      index.instances = embedding::EmbeddingStore(model.dim);
      const auto ids = k.at("ids").get<std::vector<std::string>>();
      const auto labels = k.at("labels").get<std::vector<int>>();
      const auto& rows = k.at("rows");
      if (ids.size() != labels.size() || ids.size() != rows.size()) {
        throw invalid_model("knn ids, labels and rows differ in length");
      }
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto label = label_from_int(labels[i]);
        if (!label) throw invalid_model("knn label must be 0 or 1");
        index.instances.append_row(ids[i], rows[i].get<std::vector<float>>(), label);
      }
      model.knn = std::move(index);
    }
    if (j.contains("metadata")) {
      const auto& m = j["metadata"];
      model.metadata.seed = m.value("seed", std::uint64_t{0});
      if (m.contains("cfg")) {
        const auto& c = m["cfg"];
        auto& cfg = model.metadata.config;
        cfg.learning_rate = c.value("learning_rate", cfg.learning_rate);
        cfg.l2 = c.value("l2", cfg.l2);
        cfg.epochs = c.value("epochs", cfg.epochs);
        cfg.seed = c.value("seed", cfg.seed);
        cfg.batch = c.value("batch", cfg.batch);
        cfg.class_weighting = c.value("class_weighting", cfg.class_weighting);
      }
      model.metadata.train_corpus_hash = m.value("train_corpus_hash", std::string());
      model.metadata.train_count = m.value("train_count", std::size_t{0});
      model.metadata.loss_history = m.value("loss_history", std::vector<double>{});
    }
  } catch (const nlohmann::json::exception& e) {
    throw invalid_model(std::string("model json: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kFormatError) throw;
    throw invalid_model(e.what());
  }
  model.validate();
  return model;
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
  model.validate();
  const std::string text = model_to_json(model);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIoError, kModule, "cannot write " + tmp.string());
    out << text << '\n';
    if (!out) throw Error(ErrorKind::kIoError, kModule, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::kIoError, kModule, "cannot rename to " + path.string());
}

ClassifierModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, kModule, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

}  // namespace modguard::classifiers
