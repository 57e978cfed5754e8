#include <iostream>

#include "proxrec/cli.hpp"

int main(int argc, char** argv) { return proxrec::run_cli(argc, argv, std::cout, std::cerr); }
