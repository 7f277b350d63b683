#include <iostream>

#include "psrl_cli/app.hpp"

int main(int argc, char** argv) { return psrl::cli::run_cli(argc, argv, std::cout, std::cerr); }
