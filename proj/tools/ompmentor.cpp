#include <iostream>

#include "ompmentor/cli.hpp"

int main(int argc, char** argv) { return ompmentor::cli::run_cli(argc, argv, std::cin, std::cout, std::cerr); }
