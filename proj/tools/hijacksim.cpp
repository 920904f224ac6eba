#include <iostream>

#include "hijacksim/cli/commands.hpp"

int main(int argc, char** argv) { return hijacksim::cli::run_cli(argc, argv, std::cout, std::cerr); }
