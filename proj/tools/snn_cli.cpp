#include <iostream>

#include "snn/cli.hpp"

int main(int argc, char** argv) { return snn::cli::run(argc, argv, std::cout, std::cerr); }
