#include <iostream>

#include "jumpctl/cli.hpp"

int main(int argc, char** argv) { return jumpctl::run_cli(argc, argv, std::cout, std::cerr); }
