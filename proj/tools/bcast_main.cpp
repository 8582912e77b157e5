#include <iostream>

#include "bcast/cli.hpp"

int main(int argc, char** argv) { return bcast::run_cli(argc, argv, std::cout, std::cerr); }
