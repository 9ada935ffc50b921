// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#include <string>
#include <vector>

#include "txscan/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return txscan::cli::run(args);
}
