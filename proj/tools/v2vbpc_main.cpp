// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "v2vbpc/cli.hpp"

int main(int argc, char** argv) { return v2vbpc::cli_main(argc, argv, std::cout, std::cerr); }
