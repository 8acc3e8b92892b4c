// Copyright 2026 The EDST Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "edst/error.hpp"
#include "edst/tracker.hpp"

namespace edst {

namespace {

constexpr const char* kMagic = "EDST-MODEL 1";
constexpr int kFormatVersion = 1;

struct NamedHead {
  std::string name;
  std::string kind;
  std::string slot;
  HeadConfig config;
  HeadParams* params;
};

// Fixed head order: value heads per informable slot, then slot heads, then
// requestable heads.
std::vector<NamedHead> list_heads(TrackerModel& model) {
  std::vector<NamedHead> heads;
  for (const auto& s : model.ontology().informable()) {
    heads.push_back({"value/" + s.name, "value", s.name, model.value_config(),
                     &model.value_head(s.name)});
  }
  for (const auto& s : model.ontology().informable()) {
    heads.push_back({"slot/" + s.name, "slot", s.name, model.slot_config(),
                     &model.slot_head(s.name)});
  }
  for (const auto& r : model.ontology().requestable()) {
    heads.push_back({"request/" + r, "request", r, model.request_config(),
                     &model.request_head(r)});
  }
  return heads;
}

std::uint64_t to_little_endian(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((bits >> (8 * i)) & 0xFFu) << (8 * (7 - i));
    return out;
  }
  return bits;
}

void write_doubles(std::ostream& out, std::span<const double> values) {
  for (double v : values) {
    const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
  }
}

void read_doubles(std::istream& in, std::span<double> values, const std::string& name) {
  for (double& v : values) {
    char bytes[8];
    if (!in.read(bytes, 8)) throw FormatError("model file truncated in array '" + name + "'");
    std::uint64_t bits = 0;
    std::memcpy(&bits, bytes, 8);
    v = std::bit_cast<double>(to_little_endian(bits));
  }
}

Json mode_to_json(const TrackerMode& mode) {
  Json j;
  j["labels"] = std::string(to_string(mode.labels));
  j["use_prev_belief"] = mode.use_prev_belief;
  j["ablate_value_specific"] = mode.ablate_value_specific;
  return j;
}

TrackerMode mode_from_json(const Json& j) {
  TrackerMode mode;
  mode.labels = parse_label_scheme(j.at("labels").get<std::string>());
  mode.use_prev_belief = j.at("use_prev_belief").get<bool>();
  mode.ablate_value_specific = j.at("ablate_value_specific").get<bool>();
  return mode;
}

}  // namespace

void save_model(const TrackerModel& model, std::ostream& out) {
  // Parameter spans are only read here.
  auto heads = list_heads(const_cast<TrackerModel&>(model));

  Json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["mode"] = mode_to_json(model.mode());
  manifest["ontology"] = model.ontology().to_json();
  manifest["ontology_fingerprint"] = model.ontology().fingerprint();
  manifest["embedding_dim"] = model.embeddings().dim();
  manifest["embedding_fingerprint"] = model.embeddings().fingerprint();
  manifest["filters"] = model.filters();
  manifest["dictionary"] = model.dictionary() ? model.dictionary()->to_json() : Json(nullptr);
  Json head_list = Json::array();
  Json arrays = Json::array();
  for (auto& h : heads) {
    Json jh;
    jh["name"] = h.name;
    jh["kind"] = h.kind;
    jh["slot"] = h.slot;
    jh["feature_width"] = h.config.feature_width();
    jh["summary_dim"] = h.config.summary_dim();
    jh["belief_dim"] = h.config.belief_dim;
    jh["input_dim"] = h.config.input_dim();
    jh["classes"] = h.config.classes;
    head_list.push_back(jh);
    for (const auto& g : head_groups(*h.params)) {
      Json ja;
      ja["name"] = h.name + "/" + g.name;
      ja["count"] = g.data.size();
      arrays.push_back(ja);
    }
  }
  manifest["heads"] = head_list;
  manifest["arrays"] = arrays;

  out << kMagic << '\n' << manifest.dump() << '\n';
  for (auto& h : heads) {
    for (const auto& g : head_groups(*h.params)) write_doubles(out, g.data);
  }
  if (!out) throw Error("failed to write model");
}

void save_model_file(const TrackerModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  save_model(model, out);
}

TrackerModel load_model(std::istream& in, std::shared_ptr<const EmbeddingTable> embeddings) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw FormatError("not an EDST model file");
  if (!std::getline(in, line)) throw FormatError("model file has no manifest");
  Json manifest;
  try {
    manifest = Json::parse(line);
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad model manifest: ") + e.what());
  }
  try {
    if (manifest.at("format_version").get<int>() != kFormatVersion) {
      throw FormatError("unsupported model format version");
    }
    if (!embeddings) throw ArgumentError("load_model needs an embedding table");
    if (manifest.at("embedding_dim").get<std::size_t>() != embeddings->dim()) {
      throw FormatError("model expects " +
                        std::to_string(manifest.at("embedding_dim").get<std::size_t>()) +
                        "-dim embeddings, got " + std::to_string(embeddings->dim()));
    }
    if (manifest.at("embedding_fingerprint").get<std::string>() != embeddings->fingerprint()) {
      throw FormatError("embedding table differs from the one the model was trained with");
    }
    Ontology ontology = Ontology::from_json(manifest.at("ontology"));
    if (ontology.fingerprint() != manifest.at("ontology_fingerprint").get<std::string>()) {
      throw FormatError("ontology fingerprint mismatch");
    }
    std::optional<SemanticDictionary> dictionary;
    if (!manifest.at("dictionary").is_null()) {
      dictionary = SemanticDictionary::from_json(manifest.at("dictionary"));
    }
    TrackerModel model(std::move(ontology), std::move(embeddings), std::move(dictionary),
                       mode_from_json(manifest.at("mode")),
                       manifest.at("filters").get<std::size_t>());

    const Json& arrays = manifest.at("arrays");
    std::size_t next = 0;
    for (auto& h : list_heads(model)) {
      for (const auto& g : head_groups(*h.params)) {
        const std::string name = h.name + "/" + g.name;
        if (next >= arrays.size() || arrays[next].at("name").get<std::string>() != name ||
            arrays[next].at("count").get<std::size_t>() != g.data.size()) {
          throw FormatError("model array layout mismatch at '" + name + "'");
        }
        read_doubles(in, g.data, name);
        ++next;
      }
    }
    if (next != arrays.size()) throw FormatError("model file lists unexpected arrays");
    if (in.peek() != std::char_traits<char>::eof()) {
      throw FormatError("trailing bytes after model arrays");
    }
    return model;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad model manifest: ") + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(std::string("bad model manifest: ") + e.what());
  }
}

TrackerModel load_model_file(const std::string& path,
                             std::shared_ptr<const EmbeddingTable> embeddings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model '" + path + "'");
  return load_model(in, std::move(embeddings));
}

}  // namespace edst
