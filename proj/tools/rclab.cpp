#include <iostream>

#include "rclab/cli.hpp"

int main(int argc, char** argv) { return rclab::cli::run_cli(argc, argv, std::cout, std::cerr); }
