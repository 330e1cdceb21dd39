#include <iostream>

#include "lpnr_commands.hpp"

int main(int argc, char** argv) { return lpnr::cli::run(argc, argv, std::cout, std::cerr); }
