#include <iostream>

#include "cpdd/cli.hpp"

int main(int argc, char** argv) { return cpdd::cli::run(argc, argv, std::cout, std::cerr); }
