#include <iostream>

#include "esqkd/cli.hpp"

int main(int argc, char** argv) { return esqkd::run_cli(argc, argv, std::cout, std::cerr); }
