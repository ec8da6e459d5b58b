// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "steerguard/cli.hpp"

int main(int argc, char** argv) {
    return steerguard::cli::run(argc, argv, std::cout, std::cerr);
}
