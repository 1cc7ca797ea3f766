#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return sacl::cli::run(argc, argv, std::cout, std::cerr); }
