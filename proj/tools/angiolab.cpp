#include <iostream>

#include "angio/cli.hpp"

int main(int argc, char** argv) { return angio::run_cli(argc, argv, std::cout, std::cerr); }
