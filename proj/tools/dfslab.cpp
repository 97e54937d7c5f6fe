#include <iostream>

#include "dfslab/cli.hpp"

int main(int argc, char** argv) { return dfslab::run_cli(argc, argv, std::cout, std::cerr); }
