// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace txscan::cli {

/// Dispatches the txscan subcommands (synth, build-tokenizer, train, score,
/// eval, inspect). Returns 0 on success, 1 on usage errors, 2 on data
/// errors. args excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace txscan::cli
