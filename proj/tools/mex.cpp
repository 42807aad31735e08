#include <iostream>

#include "mex/workbench/cli.hpp"

int main(int argc, char** argv) { return mex::workbench::run_cli(argc, argv, std::cin, std::cout, std::cerr); }
