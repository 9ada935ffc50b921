// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "txscan/nn/model.hpp"

namespace txscan::nn {

struct Checkpoint {
  ModelConfig config;
  ModelParams<float> params;
};

std::string attention_mode_name(AttentionMode mode);
AttentionMode parse_attention_mode(const std::string& name);

/// File layout: one JSON header line (config + tensor manifest with name,
/// shape, dtype, byte offset), then raw little-endian IEEE-754 arrays in
/// manifest order. load(save(x)) reproduces bitwise-identical tensors.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace txscan::nn
