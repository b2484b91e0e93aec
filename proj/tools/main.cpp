#include <iostream>

#include "xorcert/cli.hpp"

int main(int argc, char** argv) { return xorcert::cli::run(argc, argv, std::cout, std::cerr); }
