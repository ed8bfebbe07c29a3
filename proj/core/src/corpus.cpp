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

#include "modguard/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "modguard/error.hpp"
#include "modguard/random.hpp"
#include "modguard/textprep.hpp"

namespace modguard::corpus {
namespace {

constexpr std::string_view kModule = "corpus";
using nlohmann::json;

Error schema_error(std::size_t line, const std::string& what) {
  return Error(ErrorKind::kSchemaError, kModule, "line " + std::to_string(line) + ": " + what);
}

LabeledExample parse_record(const json& j, std::size_t line) {
  if (!j.is_object()) throw schema_error(line, "record is not a JSON object");
  auto string_field = [&](const char* key, bool required) -> std::optional<std::string> {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      if (required) throw schema_error(line, std::string("missing field '") + key + "'");
      return std::nullopt;
    }
    if (!it->is_string()) throw schema_error(line, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
  };

  LabeledExample ex;
  ex.id = *string_field("id", true);
  if (ex.id.empty()) throw schema_error(line, "field 'id' is empty");

  const auto modality = modality_from_name(*string_field("modality", true));
  if (!modality) throw schema_error(line, "field 'modality' must be \"text\" or \"image\"");
  ex.modality = *modality;
  if (ex.modality == Modality::kText) {
    ex.content = *string_field("text", true);
  } else {
    ex.content = *string_field("image_path", true);
    if (ex.content.empty()) throw schema_error(line, "field 'image_path' is empty");
  }

  const auto label = j.find("label");
  if (label == j.end() || label->is_null()) throw schema_error(line, "missing field 'label'");
  if (!label->is_number_integer()) throw schema_error(line, "field 'label' must be 0 or 1");
  ex.label = label_from_int(label->get<long long>());
  if (!ex.label) throw schema_error(line, "field 'label' must be 0 or 1");

  if (const auto it = j.find("synthetic"); it != j.end() && !it->is_null()) {
    if (!it->is_boolean()) throw schema_error(line, "field 'synthetic' must be a boolean");
    ex.synthetic = it->get<bool>();
  }
  ex.source = string_field("source", false).value_or("");
  return ex;
}

json record_json(const LabeledExample& ex) {
  nlohmann::ordered_json j;
  j["id"] = ex.id;
  j["modality"] = modality_name(ex.modality);
  j[ex.modality == Modality::kText ? "text" : "image_path"] = ex.content;
  if (ex.label) j["label"] = to_int(*ex.label);
  j["synthetic"] = ex.synthetic;
  j["source"] = ex.source;
  return j;
}

std::size_t train_count(std::size_t n, double fraction) {
  const auto raw = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(raw, 1, n - 1);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Column index by case-insensitive header name.
std::optional<std::size_t> column(const std::vector<std::string>& header, std::string_view name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (lower(trim(header[i])) == name) return i;
  }
  return std::nullopt;
}

}  // namespace

Corpus::Corpus(std::vector<LabeledExample> examples) : examples_(std::move(examples)) {
  index_.reserve(examples_.size());
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    if (!index_.emplace(examples_[i].id, i).second) {
      throw Error(ErrorKind::kDuplicateId, kModule, "duplicate id '" + examples_[i].id + "'", i);
    }
  }
}

const LabeledExample* Corpus::find(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &examples_[it->second];
}

Corpus parse_corpus(std::istream& in) {
  std::vector<LabeledExample> examples;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw schema_error(line_no, "invalid JSON");
    LabeledExample ex = parse_record(j, line_no);
    if (const auto [it, fresh] = seen.emplace(ex.id, line_no); !fresh) {
      throw Error(ErrorKind::kDuplicateId, kModule,
                  "line " + std::to_string(line_no) + ": id '" + ex.id + "' already used on line " +
                      std::to_string(it->second));
    }
    examples.push_back(std::move(ex));
  }
  return Corpus(std::move(examples));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, kModule, "cannot open " + path.string());
  return parse_corpus(in);
}

std::string corpus_to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& ex : corpus.examples()) {
    out += record_json(ex).dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].label) {
      throw Error(ErrorKind::kSchemaError, kModule, "example '" + corpus[i].id + "' has no label", i);
    }
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIoError, kModule, "cannot write " + tmp.string());
    out << corpus_to_jsonl(corpus);
    if (!out) throw Error(ErrorKind::kIoError, kModule, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::kIoError, kModule, "cannot rename to " + path.string());
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidInput, kModule, "train_fraction must lie in (0, 1)");
  }
}

std::pair<Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec) {
  spec.validate();
  // Groups of corpus indices that are split independently.
  std::vector<std::vector<std::size_t>> groups;
  if (spec.stratified) {
    groups.resize(3);  // label 0, label 1, unlabeled
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto& label = corpus[i].label;
      groups[label ? static_cast<std::size_t>(to_int(*label)) : 2].push_back(i);
    }
    if (!groups[2].empty()) {
      throw Error(ErrorKind::kInvalidInput, kModule, "stratified split needs every example labelled");
    }
    groups.pop_back();
    for (int c = 0; c < 2; ++c) {
      if (groups[c].size() < 2) {
        throw Error(ErrorKind::kTooFewExamples, kModule,
                    "class " + std::to_string(c) + " has " + std::to_string(groups[c].size()) +
                        " examples; stratified split needs at least 2");
      }
    }
  } else {
    if (corpus.size() < 2) {
      throw Error(ErrorKind::kTooFewExamples, kModule, "split needs at least 2 examples");
    }
    groups.emplace_back(corpus.size());
    std::iota(groups[0].begin(), groups[0].end(), std::size_t{0});
  }

  std::vector<bool> in_train(corpus.size(), false);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto members = groups[g];
    Rng rng(mix_seed(mix_seed(spec.seed, "split"), g));
    rng.shuffle(std::span<std::size_t>(members));
    const std::size_t n_train = train_count(members.size(), spec.train_fraction);
    for (std::size_t t = 0; t < n_train; ++t) in_train[members[t]] = true;
  }
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> test;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    (in_train[i] ? train : test).push_back(corpus[i]);
  }
  return {Corpus(std::move(train)), Corpus(std::move(test))};
}

CorpusStats stats(const Corpus& corpus) {
  CorpusStats s;
  s.total = corpus.size();
  for (const auto& ex : corpus.examples()) {
    if (ex.label) ++s.by_label[static_cast<std::size_t>(to_int(*ex.label))];
    else ++s.unlabeled;
    if (ex.synthetic) ++s.synthetic;
    ++s.by_modality_label[{std::string(modality_name(ex.modality)), ex.label ? to_int(*ex.label) : -1}];
  }
  return s;
}

std::string stats_to_json(const CorpusStats& s) {
  nlohmann::ordered_json j;
  j["total"] = s.total;
  j["label_0"] = s.by_label[0];
  j["label_1"] = s.by_label[1];
  j["unlabeled"] = s.unlabeled;
  j["synthetic"] = s.synthetic;
  nlohmann::ordered_json by = nlohmann::ordered_json::object();
  for (const auto& [key, count] : s.by_modality_label) {
    by[key.first][key.second < 0 ? "unlabeled" : "label_" + std::to_string(key.second)] = count;
  }
  j["by_modality"] = std::move(by);
  return j.dump(2);
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    // A lone empty field is a blank line.
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };
  while (i < text.size()) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          i += 2;
          continue;
        }
        quoted = false;
      } else {
        field.push_back(c);
      }
      ++i;
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n' || c == '\r') {
      end_row();
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      field.push_back(c);
      field_started = true;
    }
    ++i;
  }
  if (quoted) throw Error(ErrorKind::kFormatError, kModule, "unterminated quoted CSV field");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

Corpus ingest_hate_speech_csv(std::string_view csv, IngestReport* report) {
  const auto rows = parse_csv(csv);
  if (rows.empty()) throw Error(ErrorKind::kSchemaError, kModule, "hate-speech CSV has no header");
  const auto& header = rows[0];
  const auto class_col = column(header, "class");
  const auto tweet_col = column(header, "tweet");
  if (!class_col || !tweet_col) {
    throw Error(ErrorKind::kSchemaError, kModule, "hate-speech CSV needs 'class' and 'tweet' columns");
  }
  // The unnamed first column holds the original row number when present.
  const bool has_row_id = !header.empty() && trim(header[0]).empty();

  IngestReport r;
  std::vector<LabeledExample> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    ++r.rows;
    if (row.size() <= std::max(*class_col, *tweet_col)) {
      throw Error(ErrorKind::kSchemaError, kModule,
                  "CSV record " + std::to_string(i + 1) + " has too few columns");
    }
    if (trim(row[*class_col]) != "1") {
      ++r.dropped_class;
      continue;
    }
    auto text = textprep::clean_text(row[*tweet_col]);
    if (text.empty()) {
      ++r.dropped_empty;
      continue;
    }
    const std::string row_id = has_row_id && !trim(row[0]).empty() ? trim(row[0]) : std::to_string(i - 1);
    LabeledExample ex;
    ex.id = "hs-" + row_id;
    ex.modality = Modality::kText;
    ex.content = text.str();
    ex.label = Label::kHarmful;
    ex.source = "hate-speech-csv:" + row_id;
    out.push_back(std::move(ex));
    ++r.kept;
  }
  if (report) *report = r;
  return Corpus(std::move(out));
}

Corpus ingest_redcaps(std::string_view text, const std::filesystem::path& images_dir) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("annotations") || !j["annotations"].is_array()) {
    throw Error(ErrorKind::kSchemaError, kModule, "RedCaps file needs an 'annotations' array");
  }
  std::vector<LabeledExample> out;
  const auto& annotations = j["annotations"];
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const auto& a = annotations[i];
    if (!a.is_object() || !a.contains("image_id") || !a["image_id"].is_string() ||
        !a.contains("subreddit") || !a["subreddit"].is_string()) {
      throw Error(ErrorKind::kSchemaError, kModule,
                  "annotation " + std::to_string(i) + " needs string 'image_id' and 'subreddit'");
    }
    const auto image_id = a["image_id"].get<std::string>();
    const auto subreddit = a["subreddit"].get<std::string>();
    LabeledExample ex;
    ex.id = "redcaps-" + image_id;
    ex.modality = Modality::kImage;
    ex.content = (images_dir / subreddit / (image_id + ".jpg")).generic_string();
    ex.label = Label::kNonHarmful;
    ex.source = "redcaps:" + subreddit + "/" + image_id;
    out.push_back(std::move(ex));
  }
  return Corpus(std::move(out));
}

Corpus ingest_review_manifest(std::string_view csv, IngestReport* report) {
  const auto rows = parse_csv(csv);
  if (rows.empty()) throw Error(ErrorKind::kSchemaError, kModule, "review manifest has no header");
  const auto path_col = column(rows[0], "image_path");
  const auto query_col = column(rows[0], "proposed_query");
  const auto label_col = column(rows[0], "label");
  if (!path_col || !label_col) {
    throw Error(ErrorKind::kSchemaError, kModule, "review manifest needs image_path and label columns");
  }
  IngestReport r;
  std::vector<LabeledExample> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    ++r.rows;
    const auto cell = [&](std::optional<std::size_t> c) {
      return c && *c < row.size() ? trim(row[*c]) : std::string();
    };
    const std::string label = cell(label_col);
    if (label.empty()) {
      ++r.dropped_empty;
      continue;
    }
    if (label != "0" && label != "1") {
      throw Error(ErrorKind::kSchemaError, kModule,
                  "manifest line " + std::to_string(i + 1) + ": label must be blank, 0 or 1");
    }
    const std::string path = cell(path_col);
    if (path.empty()) {
      throw Error(ErrorKind::kSchemaError, kModule,
                  "manifest line " + std::to_string(i + 1) + ": empty image_path");
    }
    LabeledExample ex;
    ex.id = "img-" + std::filesystem::path(path).stem().string();
    ex.modality = Modality::kImage;
    ex.content = path;
    ex.label = label == "1" ? Label::kHarmful : Label::kNonHarmful;
    ex.source = "review:" + cell(query_col);
    out.push_back(std::move(ex));
    ++r.kept;
  }
  if (report) *report = r;
  return Corpus(std::move(out));
}

}  // namespace modguard::corpus
