#include <iostream>

#include "adoptminer/cli.hpp"

int main(int argc, char** argv) { return adoptminer::run_cli(argc, argv, std::cout, std::cerr); }
