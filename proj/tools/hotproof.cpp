// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "hotproof/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return hotproof::cli::run(argc, argv, std::cout, std::cerr);
}
