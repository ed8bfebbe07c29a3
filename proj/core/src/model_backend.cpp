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

#include "modguard/model_backend.hpp"

#include <json.hpp>
#include <opencv2/dnn.hpp>

#include <bit>
#include <fstream>
#include <mutex>

#include "modguard/clip_tokenizer.hpp"
#include "modguard/error.hpp"

namespace modguard::embedding {
namespace {

constexpr std::string_view kModule = "embedding";

Error format_error(const std::filesystem::path& path, const std::string& what) {
  return Error(ErrorKind::kFormatError, kModule, path.string() + ": " + what);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::vector<float> read_f32_table(const std::filesystem::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(ErrorKind::kIoError, kModule, "cannot open " + path.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  if (size != count * 4) {
    throw format_error(path, "expected " + std::to_string(count * 4) + " bytes, found " +
                                 std::to_string(size));
  }
  in.seekg(0);
  std::vector<char> bytes(size);
  in.read(bytes.data(), static_cast<std::streamsize>(size));
  std::vector<float> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + k])) << (8 * k);
    }
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

cv::dnn::Net load_graph(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::kBackendFailure, kModule, "model file not found: " + path.string());
  }
  try {
    cv::dnn::Net net = cv::dnn::readNetFromONNX(path.string());
    net.setPreferableBackend(cv::dnn::DNN_BACKEND_OPENCV);
    net.setPreferableTarget(cv::dnn::DNN_TARGET_CPU);
    return net;
  } catch (const cv::Exception& e) {
    throw Error(ErrorKind::kBackendFailure, kModule,
                "cannot load " + path.string() + ": " + e.what());
  }
}

std::vector<std::vector<float>> rows_of(const cv::Mat& out, std::size_t batch, std::size_t dim) {
  if (out.total() != batch * dim || out.type() != CV_32F) {
    throw Error(ErrorKind::kBackendFailure, kModule,
                "graph output has " + std::to_string(out.total()) + " values, expected " +
                    std::to_string(batch * dim));
  }
  const cv::Mat flat = out.isContinuous() ? out : out.clone();
  const auto* p = flat.ptr<float>();
  std::vector<std::vector<float>> rows(batch);
  for (std::size_t b = 0; b < batch; ++b) rows[b].assign(p + b * dim, p + (b + 1) * dim);
  return rows;
}

}  // namespace

ModelSidecar ModelSidecar::load(const std::filesystem::path& sidecar_json) {
  std::ifstream in(sidecar_json);
  if (!in) throw Error(ErrorKind::kIoError, kModule, "cannot open " + sidecar_json.string());
  const auto base = sidecar_json.parent_path();
  ModelSidecar out;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.value("format_version", 1) != 1) throw format_error(sidecar_json, "unsupported format_version");
    out.checkpoint = j.value("checkpoint", std::string());
    out.dim = j.at("dim").get<std::size_t>();
    if (out.dim == 0) throw format_error(sidecar_json, "dim must be positive");
    if (j.contains("text")) {
      const auto& t = j["text"];
      Text text;
      text.graph = resolve(base, t.at("graph").get<std::string>());
      text.token_embedding = resolve(base, t.at("token_embedding").get<std::string>());
      text.vocab_size = t.at("vocab_size").get<std::size_t>();
      text.width = t.at("width").get<std::size_t>();
      text.context_length = t.value("context_length", std::size_t{77});
      text.vocab = resolve(base, t.at("vocab").get<std::string>());
      text.merges = resolve(base, t.at("merges").get<std::string>());
      text.bos_token = t.value("bos_token", text.bos_token);
      text.eos_token = t.value("eos_token", text.eos_token);
      text.pad_id = t.value("pad_id", 0);
      text.embeddings_input = t.value("embeddings_input", text.embeddings_input);
      text.output = t.value("output", std::string());
      if (text.vocab_size == 0 || text.width == 0) {
        throw format_error(sidecar_json, "text vocab_size and width must be positive");
      }
      out.text = std::move(text);
    }
    if (j.contains("image")) {
      const auto& m = j["image"];
      Image image;
      image.graph = resolve(base, m.at("graph").get<std::string>());
      image.input = m.value("input", image.input);
      image.output = m.value("output", std::string());
      image.resize_shorter = m.value("resize_shorter", 224);
      image.crop = m.value("crop", 224);
      image.mean = m.at("mean").get<std::array<float, 3>>();
      image.std = m.at("std").get<std::array<float, 3>>();
      if (image.crop <= 0 || image.resize_shorter < image.crop) {
        throw format_error(sidecar_json, "resize_shorter must be >= crop > 0");
      }
      for (float s : image.std) {
        if (!(s > 0.0f)) throw format_error(sidecar_json, "image std must be positive");
      }
      out.image = std::move(image);
    }
  } catch (const nlohmann::json::exception& e) {
    throw format_error(sidecar_json, e.what());
  }
  if (!out.text && !out.image) throw format_error(sidecar_json, "no text or image encoder");
  return out;
}

struct ModelBackend::Impl {
  ModelSidecar sidecar;
  std::optional<ClipTokenizer> tokenizer;
  std::vector<float> token_table;
  mutable std::mutex mutex;
  mutable cv::dnn::Net text_net;
  mutable cv::dnn::Net image_net;
};

ModelBackend::ModelBackend(const std::filesystem::path& sidecar_json)
    : impl_(std::make_unique<Impl>()) {
  impl_->sidecar = ModelSidecar::load(sidecar_json);
  const auto& sc = impl_->sidecar;
  if (sc.text) {
    ClipTokenizer::Options options;
    options.context_length = sc.text->context_length;
    options.bos_token = sc.text->bos_token;
    options.eos_token = sc.text->eos_token;
    options.pad_id = sc.text->pad_id;
    impl_->tokenizer.emplace(ClipTokenizer::from_files(sc.text->vocab, sc.text->merges, options));
    impl_->token_table = read_f32_table(sc.text->token_embedding, sc.text->vocab_size * sc.text->width);
    impl_->text_net = load_graph(sc.text->graph);
  }
  if (sc.image) impl_->image_net = load_graph(sc.image->graph);
}

ModelBackend::~ModelBackend() = default;

std::string ModelBackend::name() const {
  return impl_->sidecar.checkpoint.empty() ? "model" : "model:" + impl_->sidecar.checkpoint;
}

std::size_t ModelBackend::dim() const { return impl_->sidecar.dim; }

bool ModelBackend::supports(Modality modality) const {
  return modality == Modality::kText ? impl_->sidecar.text.has_value()
                                     : impl_->sidecar.image.has_value();
}

const ModelSidecar& ModelBackend::sidecar() const { return impl_->sidecar; }

std::vector<std::vector<float>> ModelBackend::encode_texts(
    std::span<const textprep::CleanText> batch) const {
  const auto& text = impl_->sidecar.text;
  if (!text) throw Error(ErrorKind::kInvalidInput, kModule, "model has no text encoder");
  const int b = static_cast<int>(batch.size());
  const int length = static_cast<int>(text->context_length);
  const int width = static_cast<int>(text->width);
  const int emb_shape[] = {b, length, width};
  cv::Mat embeddings(3, emb_shape, CV_32F);
  std::vector<std::size_t> eos(batch.size());
  auto* emb = embeddings.ptr<float>();
  for (int i = 0; i < b; ++i) {
    const auto tokens = impl_->tokenizer->encode(batch[i].str());
    for (int t = 0; t < length; ++t) {
      const auto id = static_cast<std::size_t>(tokens.ids[t]);
      if (id >= text->vocab_size) {
        throw Error(ErrorKind::kBackendFailure, kModule,
                    "token id " + std::to_string(id) + " outside embedding table");
      }
      std::copy_n(impl_->token_table.data() + id * text->width, text->width,
                  emb + (static_cast<std::size_t>(i) * length + t) * width);
    }
    eos[i] = tokens.eos_position;
  }
  std::lock_guard lock(impl_->mutex);
  try {
    impl_->text_net.setInput(embeddings, text->embeddings_input);
    const cv::Mat out = impl_->text_net.forward(text->output);
    const std::size_t dim = impl_->sidecar.dim;
    const auto positions = rows_of(out, batch.size() * text->context_length, dim);
    std::vector<std::vector<float>> rows;
    rows.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      rows.push_back(positions[i * text->context_length + eos[i]]);
    }
    return rows;
  } catch (const cv::Exception& e) {
    throw Error(ErrorKind::kBackendFailure, kModule, std::string("text inference: ") + e.what());
  }
}

std::vector<std::vector<float>> ModelBackend::encode_images(
    std::span<const DecodedImage> batch) const {
  const auto& image = impl_->sidecar.image;
  if (!image) throw Error(ErrorKind::kInvalidInput, kModule, "model has no image encoder");
  const int b = static_cast<int>(batch.size());
  const int crop = image->crop;
  const int shape[] = {b, 3, crop, crop};
  cv::Mat pixels(4, shape, CV_32F);
  auto* p = pixels.ptr<float>();
  const std::size_t plane = static_cast<std::size_t>(crop) * crop;
  for (int i = 0; i < b; ++i) {
    const auto prepared = resize_and_center_crop(batch[i], image->resize_shorter, crop);
    for (int y = 0; y < crop; ++y) {
      for (int x = 0; x < crop; ++x) {
        for (int c = 0; c < 3; ++c) {
          const float v = prepared.at(x, y, c) / 255.0f;
          p[(static_cast<std::size_t>(i) * 3 + c) * plane + static_cast<std::size_t>(y) * crop + x] =
              (v - image->mean[c]) / image->std[c];
        }
      }
    }
  }
  std::lock_guard lock(impl_->mutex);
  try {
    impl_->image_net.setInput(pixels, image->input);
    const cv::Mat out = impl_->image_net.forward(image->output);
    return rows_of(out, batch.size(), impl_->sidecar.dim);
  } catch (const cv::Exception& e) {
    throw Error(ErrorKind::kBackendFailure, kModule, std::string("image inference: ") + e.what());
  }
}

}  // namespace modguard::embedding
