#include "gaitopt/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return gaitopt::cli::run(argc, argv, std::cout, std::cerr); }
