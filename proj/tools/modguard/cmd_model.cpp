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

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "cli.hpp"
#include "modguard/classifiers.hpp"
#include "modguard/corpus.hpp"
#include "modguard/embedding.hpp"
#include "modguard/embedding_store.hpp"
#include "modguard/error.hpp"
#include "modguard/image.hpp"
#include "modguard/metrics.hpp"
#include "modguard/mock_backend.hpp"
#include "modguard/model_backend.hpp"
#include "modguard/projection.hpp"
#include "modguard/random.hpp"
#include "modguard/service.hpp"
#include "modguard/textprep.hpp"

namespace modguard::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

struct BackendOpts {
  std::string backend = "mock";
  std::string model_file;
  std::size_t dim = embedding::kDefaultDim;
};

void add_backend_options(CLI::App* cmd, BackendOpts& o) {
  cmd->add_option("--backend", o.backend, "Embedding backend")
      ->check(CLI::IsMember({"model", "mock"}))
      ->envname("MODGUARD_BACKEND")
      ->capture_default_str();
  cmd->add_option("--model-file", o.model_file, "Embedding model sidecar JSON (backend=model)")
      ->envname("MODGUARD_MODEL_FILE");
  cmd->add_option("--dim", o.dim, "Mock backend width")->capture_default_str();
}

std::unique_ptr<embedding::EmbeddingBackend> make_backend(const BackendOpts& o) {
  if (o.backend == "model") {
    if (o.model_file.empty()) {
      throw Error(ErrorKind::kInvalidInput, "cli", "--backend model needs --model-file");
    }
    return std::make_unique<embedding::ModelBackend>(o.model_file);
  }
  return std::make_unique<embedding::MockBackend>(o.dim);
}

struct Item {
  std::string id;
  Modality modality = Modality::kText;
  std::string content;
  std::optional<Label> label;
};

fs::path resolve_image(const std::string& path, const fs::path& base_dir) {
  const fs::path p(path);
  if (p.is_absolute() || fs::exists(p)) return p;
  return base_dir / p;
}

// Embeds items in order; texts are cleaned first (cleaning is idempotent).
embedding::EmbeddingStore embed_items(const embedding::EmbeddingBackend& backend,
                                      const std::vector<Item>& items, const fs::path& base_dir,
                                      std::size_t batch) {
  std::vector<std::size_t> text_idx, image_idx;
  std::vector<textprep::CleanText> texts;
  std::vector<DecodedImage> images;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].modality == Modality::kText) {
      text_idx.push_back(i);
      texts.push_back(textprep::clean_text(items[i].content));
    } else {
      image_idx.push_back(i);
      images.push_back(load_image(resolve_image(items[i].content, base_dir)));
    }
  }
  std::vector<std::optional<embedding::EmbeddingVector>> vectors(items.size());
  if (!texts.empty()) {
    auto v = embedding::embed_texts(backend, texts, batch);
    for (std::size_t k = 0; k < v.size(); ++k) vectors[text_idx[k]] = std::move(v[k]);
  }
  if (!images.empty()) {
    auto v = embedding::embed_images(backend, images, batch);
    for (std::size_t k = 0; k < v.size(); ++k) vectors[image_idx[k]] = std::move(v[k]);
  }
  embedding::EmbeddingStore store(backend.dim());
  for (std::size_t i = 0; i < items.size(); ++i) store.append(items[i].id, *vectors[i], items[i].label);
  return store;
}

std::vector<Item> items_from_corpus(const corpus::Corpus& c) {
  std::vector<Item> items;
  for (const auto& ex : c.examples()) items.push_back({ex.id, ex.modality, ex.content, ex.label});
  return items;
}

embedding::EmbeddingStore load_labeled_store(const std::string& path, const std::string& labels) {
  auto store = embedding::read_store(path);
  if (!labels.empty()) embedding::apply_labels(store, labels);
  return store;
}

struct TrainOpts {
  std::string algo = "logreg";
  classifiers::TrainConfig cfg;
  int k = 5;
};

void add_train_options(CLI::App* cmd, TrainOpts& o) {
  cmd->add_option("--algo", o.algo, "Classifier")
      ->check(CLI::IsMember({"logreg", "logistic", "svm", "linear_svm", "knn"}))
      ->capture_default_str();
  cmd->add_option("--lr", o.cfg.learning_rate, "Learning rate")->capture_default_str();
  cmd->add_option("--l2", o.cfg.l2, "L2 penalty")->capture_default_str();
  cmd->add_option("--epochs", o.cfg.epochs, "Epochs")->capture_default_str();
  cmd->add_option("--batch", o.cfg.batch, "Mini-batch size")->capture_default_str();
  cmd->add_option("--k", o.k, "Neighbours for knn (odd)")->capture_default_str();
  cmd->add_flag("--class-weighting", o.cfg.class_weighting, "Weight examples by n / (2 n_class)");
}

classifiers::ClassifierModel train_with(const TrainOpts& o, const embedding::EmbeddingStore& store,
                                        std::span<const Label> y) {
  const auto kind = *classifiers::kind_from_name(o.algo);
  switch (kind) {
    case classifiers::ModelKind::kLogistic: return classifiers::train_logistic(store, y, o.cfg);
    case classifiers::ModelKind::kLinearSvm: return classifiers::train_svm(store, y, o.cfg);
    case classifiers::ModelKind::kKnn: return classifiers::train_knn(store, y, o.k);
  }
  throw Error(ErrorKind::kUnsupportedKind, "cli", "unknown algorithm " + o.algo);
}

// Picks (lr, l2) from the fixed grid by validation F1 on a seeded stratified
// 80/20 split of the training rows.
classifiers::TrainConfig grid_search(const TrainOpts& o, const embedding::EmbeddingStore& store,
                                     std::span<const Label> y, const Globals& g) {
  std::vector<std::size_t> train_idx, val_idx;
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (to_int(y[i]) == c) members.push_back(i);
    }
    Rng rng(mix_seed(mix_seed(o.cfg.seed, "grid"), static_cast<std::uint64_t>(c)));
    rng.shuffle(std::span<std::size_t>(members));
    const auto n_train = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(0.8 * members.size())), 1, std::max<std::size_t>(members.size(), 2) - 1);
    for (std::size_t t = 0; t < members.size(); ++t) (t < n_train ? train_idx : val_idx).push_back(members[t]);
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());
  const auto tr = store.subset(train_idx);
  const auto va = store.subset(val_idx);
  std::vector<Label> ytr, yva;
  for (auto i : train_idx) ytr.push_back(y[i]);
  for (auto i : val_idx) yva.push_back(y[i]);

  classifiers::TrainConfig best = o.cfg;
  double best_f1 = -1.0;
  for (double lr : {0.01, 0.1}) {
    for (double l2 : {0.0, 1e-4, 1e-2}) {
      TrainOpts trial = o;
      trial.cfg.learning_rate = lr;
      trial.cfg.l2 = l2;
      const auto model = train_with(trial, tr, ytr);
      const auto report = metrics::evaluate(model, va, yva);
      std::ostringstream line;
      line << "grid: lr=" << lr << " l2=" << l2 << " val_f1=" << report.prf.f1;
      log(g, line.str());
      if (report.prf.f1 > best_f1) {
        best_f1 = report.prf.f1;
        best = trial.cfg;
      }
    }
  }
  return best;
}

std::string summary(const metrics::EvaluationReport& r) {
  std::ostringstream s;
  s.precision(6);
  s << "precision=" << r.prf.precision << " recall=" << r.prf.recall << " f1=" << r.prf.f1
    << " accuracy=" << r.accuracy << " auc=" << r.roc.auc;
  return s.str();
}

void add_embed(CLI::App& app, Globals& g) {
  struct Opts {
    BackendOpts backend;
    std::string in, out, modality = "text";
    std::size_t batch = embedding::kDefaultBatchSize;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("embed", "Embed texts or images into a vector store");
  add_backend_options(cmd, o->backend);
  cmd->add_option("--model", o->backend.model_file, "Alias of --model-file");
  cmd->add_option("--in", o->in, "JSONL of {id, text | image_path[, label]}")->required();
  cmd->add_option("--out", o->out, "Store path (a .meta file is written alongside)")->required();
  cmd->add_option("--modality", o->modality, "Default modality for records without one")
      ->check(CLI::IsMember({"text", "image"}))
      ->capture_default_str();
  cmd->add_option("--batch", o->batch, "Backend batch size")->capture_default_str();
  cmd->callback([o, &g] {
    const auto fallback = *modality_from_name(o->modality);
    std::vector<Item> items;
    for_each_jsonl(o->in, [&](const json& j, std::size_t line) {
      Item it;
      if (!j.contains("id") || !j["id"].is_string()) {
        throw Error(ErrorKind::kSchemaError, "cli", "line " + std::to_string(line) + ": missing id");
      }
      it.id = j["id"].get<std::string>();
      it.modality = fallback;
      if (j.contains("modality") && j["modality"].is_string()) {
        const auto m = modality_from_name(j["modality"].get<std::string>());
        if (!m) throw Error(ErrorKind::kSchemaError, "cli", "line " + std::to_string(line) + ": bad modality");
        it.modality = *m;
      }
      const char* key = it.modality == Modality::kText ? "text" : "image_path";
      if (!j.contains(key) || !j[key].is_string()) {
        throw Error(ErrorKind::kSchemaError, "cli",
                    "line " + std::to_string(line) + ": missing field '" + key + "'");
      }
      it.content = j[key].get<std::string>();
      if (j.contains("label") && j["label"].is_number_integer()) it.label = label_from_int(j["label"].get<long long>());
      items.push_back(std::move(it));
    });
    if (items.empty()) throw Error(ErrorKind::kInvalidInput, "cli", "no records in " + o->in);
    const auto backend = make_backend(o->backend);
    const auto store = embed_items(*backend, items, fs::path(o->in).parent_path(), o->batch);
    embedding::write_store(store, o->out);
    log(g, "embed: " + std::to_string(store.count()) + " vectors of dim " + std::to_string(store.dim()) +
               " via " + backend->name());
  });
}

void add_train(CLI::App& app, Globals& g) {
  struct Opts {
    TrainOpts train;
    std::string store, labels, out;
    bool grid = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("train", "Train a classifier on a labelled store");
  add_train_options(cmd, o->train);
  cmd->add_option("--store", o->store, "Embedding store")->required();
  cmd->add_option("--labels", o->labels, "Label meta file (defaults to the store's own)");
  cmd->add_option("--out", o->out, "Model JSON")->required();
  cmd->add_flag("--grid", o->grid, "Select lr and l2 from the built-in grid by validation F1");
  cmd->callback([o, &g] {
    const auto store = load_labeled_store(o->store, o->labels);
    const auto y = store.required_labels();
    TrainOpts opts = o->train;
    opts.cfg.seed = g.seed;
    if (o->grid && opts.algo != "knn") opts.cfg = grid_search(opts, store, y, g);
    const auto model = train_with(opts, store, y);
    classifiers::save_model(model, o->out);
    std::ostringstream msg;
    msg << "train: " << classifiers::kind_name(model.kind) << " on " << store.count() << " rows";
    if (!model.metadata.loss_history.empty()) msg << ", final objective " << model.metadata.loss_history.back();
    log(g, msg.str());
  });
}

void add_predict(CLI::App& app, Globals&) {
  struct Opts {
    std::string model, store, out;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("predict", "Score every row of a store");
  cmd->add_option("--model", o->model, "Model JSON")->required();
  cmd->add_option("--store", o->store, "Embedding store")->required();
  cmd->add_option("--out", o->out, "Predictions JSONL")->required();
  cmd->callback([o] {
    const auto model = classifiers::load_model(o->model);
    const auto store = embedding::read_store(o->store);
    const auto preds = classifiers::predict_all(model, store);
    std::string out;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      ordered_json rec;
      rec["id"] = store.ids()[i];
      rec["label"] = to_int(preds[i].label);
      rec["score"] = preds[i].score;
      out += rec.dump() + "\n";
    }
    write_text_file(o->out, out);
  });
}

void add_eval(CLI::App& app, Globals&) {
  struct Opts {
    std::string model, store, labels, report, roc_csv;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("eval", "Evaluate a model on a labelled store");
  cmd->add_option("--model", o->model, "Model JSON")->required();
  cmd->add_option("--store", o->store, "Embedding store")->required();
  cmd->add_option("--labels", o->labels, "Label meta file (defaults to the store's own)");
  cmd->add_option("--report", o->report, "Report JSON output")->required();
  cmd->add_option("--roc-csv", o->roc_csv, "ROC curve CSV output");
  cmd->callback([o] {
    const auto model = classifiers::load_model(o->model);
    const auto store = load_labeled_store(o->store, o->labels);
    const auto report = metrics::evaluate(model, store, store.required_labels());
    write_text_file(o->report, metrics::report_to_json(report) + "\n");
    if (!o->roc_csv.empty()) write_text_file(o->roc_csv, metrics::roc_to_csv(report.roc));
    std::cout << summary(report) << '\n';
  });
}

void add_reduce(CLI::App& app, Globals& g) {
  struct Opts {
    std::string store, method = "umap", out, highlight;
    bool highlight_only = false;
    projection::ProjectionConfig cfg;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("reduce", "Project a store to 2D/3D for plotting");
  cmd->add_option("--store", o->store, "Embedding store")->required();
  cmd->add_option("--method", o->method, "Projection method")
      ->check(CLI::IsMember({"pca", "umap"}))
      ->capture_default_str();
  cmd->add_option("--dim", o->cfg.target_dim, "Output dimension")->check(CLI::IsMember({2, 3}))->capture_default_str();
  cmd->add_option("--out", o->out, "CSV output")->required();
  cmd->add_option("--neighbors", o->cfg.n_neighbors, "UMAP neighbours")->capture_default_str();
  cmd->add_option("--min-dist", o->cfg.min_dist, "UMAP min_dist")->capture_default_str();
  cmd->add_option("--epochs", o->cfg.epochs, "UMAP epochs")->capture_default_str();
  cmd->add_option("--highlight", o->highlight, "File of ids (one per line) to flag in the CSV");
  cmd->add_flag("--highlight-only", o->highlight_only, "Reduce only the highlighted ids");
  cmd->callback([o, &g] {
    auto store = embedding::read_store(o->store);
    std::unordered_set<std::string> highlight;
    if (!o->highlight.empty()) {
      std::istringstream lines(read_text_file(o->highlight));
      for (std::string line; std::getline(lines, line);) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) highlight.insert(line);
      }
    } else if (o->highlight_only) {
      throw Error(ErrorKind::kInvalidInput, "cli", "--highlight-only needs --highlight");
    }
    if (o->highlight_only) {
      std::vector<std::size_t> keep;
      for (std::size_t i = 0; i < store.count(); ++i) {
        if (highlight.count(store.ids()[i])) keep.push_back(i);
      }
      store = store.subset(keep);
    }
    auto cfg = o->cfg;
    cfg.seed = g.seed;
    const auto proj = o->method == "pca" ? projection::pca(store, cfg.target_dim) : projection::umap(store, cfg);
    write_text_file(o->out, projection::projection_to_csv(proj, &store.labels(),
                                                           o->highlight.empty() ? nullptr : &highlight));
    log(g, "reduce: " + std::to_string(proj.count()) + " points via " + o->method);
  });
}

void add_serve(CLI::App& app, Globals& g) {
  struct Opts {
    service::ServiceConfig cfg;
    std::string model, model_file;
    double threshold = 0.0;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("serve", "Run the classification HTTP service");
  cmd->add_option("--model", o->model, "Classifier model JSON")->required()->envname("MODGUARD_MODEL");
  cmd->add_option("--backend", o->cfg.backend, "Embedding backend")
      ->check(CLI::IsMember({"model", "mock"}))
      ->envname("MODGUARD_BACKEND")
      ->capture_default_str();
  cmd->add_option("--model-file", o->model_file, "Embedding model sidecar (backend=model)")
      ->envname("MODGUARD_MODEL_FILE");
  cmd->add_option("--bind", o->cfg.bind_addr, "host:port")->envname("MODGUARD_BIND")->capture_default_str();
  cmd->add_option("--max-body", o->cfg.max_body_bytes, "Largest accepted body in bytes")
      ->envname("MODGUARD_MAX_BODY")
      ->capture_default_str();
  auto* threshold = cmd->add_option("--threshold", o->threshold, "Override the model file's threshold")
                        ->envname("MODGUARD_THRESHOLD");
  cmd->add_option("--workers", o->cfg.backend_workers, "Concurrent embedding calls")->capture_default_str();
  cmd->callback([o, threshold, &g] {
    auto cfg = o->cfg;
    cfg.model_path = o->model;
    cfg.model_file_path = o->model_file;
    if (threshold->count() > 0) cfg.threshold_override = o->threshold;

    // Block the shutdown signals before any thread starts so only the
    // watcher below receives them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    service::Service svc(cfg);
    const int port = svc.start();
    log(g, "serve: listening on port " + std::to_string(port) + ", model " + svc.snapshot()->model_hash);
    int received = 0;
    sigwait(&signals, &received);
    log(g, "serve: shutting down");
    svc.stop();
  });
}

void add_pipeline(CLI::App& app, Globals& g) {
  struct Opts {
    BackendOpts backend;
    TrainOpts train;
    std::string in, work;
    double fraction = 0.8;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand(
      "pipeline", "Corpus to report in one go: embed, split, train, evaluate and project");
  add_backend_options(cmd, o->backend);
  add_train_options(cmd, o->train);
  cmd->add_option("--in", o->in, "Corpus JSONL")->required();
  cmd->add_option("--work", o->work, "Output directory")->required();
  cmd->add_option("--fraction", o->fraction, "Train fraction")->capture_default_str();
  cmd->callback([o, &g] {
    const fs::path work(o->work);
    fs::create_directories(work);
    const auto all = corpus::load_corpus(o->in);
    corpus::SplitSpec spec;
    spec.train_fraction = o->fraction;
    spec.seed = mix_seed(g.seed, "pipeline-split");
    const auto [train, test] = corpus::split(all, spec);
    corpus::save_corpus(train, work / "train.jsonl");
    corpus::save_corpus(test, work / "test.jsonl");

    const auto backend = make_backend(o->backend);
    const fs::path base = fs::path(o->in).parent_path();
    const auto train_store = embed_items(*backend, items_from_corpus(train), base, embedding::kDefaultBatchSize);
    const auto test_store = embed_items(*backend, items_from_corpus(test), base, embedding::kDefaultBatchSize);
    embedding::write_store(train_store, work / "train.emb");
    embedding::write_store(test_store, work / "test.emb");

    TrainOpts opts = o->train;
    opts.cfg.seed = mix_seed(g.seed, "pipeline-train");
    const auto model = train_with(opts, train_store, train_store.required_labels());
    classifiers::save_model(model, work / "model.json");

    const auto report = metrics::evaluate(model, test_store, test_store.required_labels());
    write_text_file(work / "report.json", metrics::report_to_json(report) + "\n");
    write_text_file(work / "roc.csv", metrics::roc_to_csv(report.roc));

    projection::ProjectionConfig pc;
    pc.seed = mix_seed(g.seed, "pipeline-reduce");
    const bool use_umap = train_store.count() > pc.n_neighbors;
    const auto proj = use_umap ? projection::umap(train_store, pc) : projection::pca(train_store, 3);
    write_text_file(work / "projection.csv", projection::projection_to_csv(proj, &train_store.labels()));
    log(g, "pipeline: " + std::to_string(train.size()) + " train / " + std::to_string(test.size()) +
               " test examples, outputs in " + work.string());
    std::cout << summary(report) << '\n';
  });
}

}  // namespace

void add_model_commands(CLI::App& app, Globals& g) {
  add_embed(app, g);
  add_train(app, g);
  add_predict(app, g);
  add_eval(app, g);
  add_reduce(app, g);
  add_serve(app, g);
  add_pipeline(app, g);
}

}  // namespace modguard::cli
