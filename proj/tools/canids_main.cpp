#include <iostream>

#include "canids/cli.hpp"

int main(int argc, char** argv) { return canids::run_cli(argc, argv, std::cout, std::cerr); }
