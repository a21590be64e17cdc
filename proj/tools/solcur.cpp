//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include <iostream>

#include "solcur/cli.hpp"

int main(int argc, char **argv) { return solcur::run_cli(argc, argv, std::cout, std::cerr); }
