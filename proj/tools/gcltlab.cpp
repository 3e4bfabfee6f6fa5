#include <iostream>

#include "gcltlab/cli.hpp"

int main(int argc, char** argv) { return gcltlab::cli::run(argc, argv, std::cout, std::cerr); }
