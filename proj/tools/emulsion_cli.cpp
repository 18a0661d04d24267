#include "emulsion/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return emulsion::run_cli(argc, argv, std::cout, std::cerr); }
