#include <iostream>

#include "bridgex/cli.hpp"

int main(int argc, char** argv) { return bridgex::cli::run_cli(argc, argv, std::cout, std::cerr); }
