// SPDX-License-Identifier: Apache-2.0
#include "drng/cli.hpp"

int main(int argc, char** argv) { return drng::cli_main(argc, argv); }
