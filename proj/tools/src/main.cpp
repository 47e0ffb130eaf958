#include <iostream>

#include "kslab/app/cli.hpp"

int main(int argc, char** argv) { return kslab::app::run_cli(argc, argv, std::cout, std::cerr); }
