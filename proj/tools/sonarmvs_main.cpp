#include <iostream>

#include "sonarmvs/cli.hpp"

int main(int argc, char** argv) { return sonarmvs::cli::run(argc, argv, std::cout, std::cerr); }
