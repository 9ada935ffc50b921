// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#include "txscan/nn/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "txscan/errors.hpp"

namespace txscan::nn {

using nlohmann::json;

std::string attention_mode_name(AttentionMode mode) {
  return mode == AttentionMode::Causal ? "causal" : "bidirectional";
}

AttentionMode parse_attention_mode(const std::string& name) {
  if (name == "causal") return AttentionMode::Causal;
  if (name == "bidirectional") return AttentionMode::Bidirectional;
  throw CorruptCheckpoint("unknown attention mode: " + name);
}

namespace {

json config_to_json(const ModelConfig& cfg) {
  json out;
  out["vocab_size"] = cfg.vocab_size;
  out["d_model"] = cfg.d_model;
  out["n_heads"] = cfg.n_heads;
  out["n_layers"] = cfg.n_layers;
  out["d_ff"] = cfg.d_ff;
  out["max_len"] = cfg.max_len;
  out["rope_base"] = cfg.rope_base;
  out["attention_mode"] = attention_mode_name(cfg.attention_mode);
  out["precision"] = cfg.precision == Precision::F64 ? "f64" : "f32";
  return out;
}

ModelConfig config_from_json(const json& doc) {
  ModelConfig cfg;
  try {
    cfg.vocab_size = doc.at("vocab_size").get<int>();
    cfg.d_model = doc.at("d_model").get<int>();
    cfg.n_heads = doc.at("n_heads").get<int>();
    cfg.n_layers = doc.at("n_layers").get<int>();
    cfg.d_ff = doc.at("d_ff").get<int>();
    cfg.max_len = doc.at("max_len").get<int>();
    cfg.rope_base = doc.at("rope_base").get<double>();
    cfg.attention_mode =
        parse_attention_mode(doc.at("attention_mode").get<std::string>());
    cfg.precision =
        doc.at("precision").get<std::string>() == "f64" ? Precision::F64
                                                        : Precision::F32;
  } catch (const json::exception& e) {
    throw CorruptCheckpoint(std::string("bad checkpoint config: ") + e.what());
  }
  return cfg;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  json header;
  header["config"] = config_to_json(ckpt.config);
  json manifest = json::array();
  std::uint64_t offset = 0;
  for_each_tensor(ckpt.params,
                  [&](const std::string& name, const Mat<float>& m) {
                    json entry;
                    entry["name"] = name;
                    entry["shape"] = {m.rows, m.cols};
                    entry["dtype"] = "f32";
                    entry["offset"] = offset;
                    manifest.push_back(entry);
                    offset += m.size() * sizeof(float);
                  });
  header["manifest"] = manifest;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot open checkpoint for write: " + path);
  out << header.dump() << '\n';
  for_each_tensor(ckpt.params,
                  [&](const std::string&, const Mat<float>& m) {
                    out.write(reinterpret_cast<const char*>(m.v.data()),
                              static_cast<std::streamsize>(m.size() *
                                                           sizeof(float)));
                  });
  if (!out) throw IOError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(in, line)) throw CorruptCheckpoint("missing header line");
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.contains("config") ||
      !header.contains("manifest"))
    throw CorruptCheckpoint("malformed checkpoint header");

  Checkpoint ckpt;
  ckpt.config = config_from_json(header["config"]);
  ckpt.params = ModelParams<float>::zeros_like(ckpt.config);

  const std::streamoff body_start = in.tellg();
  in.seekg(0, std::ios::end);
  const std::uint64_t body_size =
      static_cast<std::uint64_t>(in.tellg() - body_start);
  in.seekg(body_start);

  const json& manifest = header["manifest"];
  std::size_t entry_idx = 0;
  std::uint64_t expected_offset = 0;
  for_each_tensor(ckpt.params, [&](const std::string& name, Mat<float>& m) {
    if (entry_idx >= manifest.size())
      throw CorruptCheckpoint("manifest shorter than parameter set");
    const json& entry = manifest[entry_idx++];
    if (entry.value("name", "") != name)
      throw CorruptCheckpoint("manifest tensor name mismatch at " + name);
    if (entry.value("dtype", "") != "f32")
      throw CorruptCheckpoint("unsupported tensor dtype for " + name);
    const auto shape = entry.value("shape", std::vector<int>{});
    if (shape.size() != 2 || shape[0] != m.rows || shape[1] != m.cols)
      throw CorruptCheckpoint("manifest shape mismatch at " + name);
    if (entry.value("offset", std::uint64_t(0)) != expected_offset)
      throw CorruptCheckpoint("manifest offset mismatch at " + name);
    expected_offset += m.size() * sizeof(float);
  });
  if (entry_idx != manifest.size())
    throw CorruptCheckpoint("manifest longer than parameter set");
  if (expected_offset != body_size)
    throw CorruptCheckpoint("checkpoint body length mismatch");

  for_each_tensor(ckpt.params, [&](const std::string& name, Mat<float>& m) {
    in.read(reinterpret_cast<char*>(m.v.data()),
            static_cast<std::streamsize>(m.size() * sizeof(float)));
    if (!in) throw CorruptCheckpoint("truncated tensor data at " + name);
  });
  return ckpt;
}

}  // namespace txscan::nn
