// SPDX-FileCopyrightText: © 2026 The TuckerForge Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "tuckerforge/cli.hpp"

int main(int argc, char** argv) { return tuckerforge::cli::main(argc, argv, std::cout, std::cerr); }
