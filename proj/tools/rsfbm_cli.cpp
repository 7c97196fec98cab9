#include <iostream>

#include "rsfbm/cli.h"

int main(int argc, char** argv) { return rsfbm::cli::run(argc, argv, std::cout, std::cerr); }
