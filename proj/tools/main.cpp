#include <iostream>

#include "cohexp/cli.hpp"

int main(int argc, char** argv) { return cohexp::cli::run(argc, argv, std::cout, std::cerr); }
