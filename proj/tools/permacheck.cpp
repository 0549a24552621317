#include <iostream>

#include "permacheck/cli.hpp"

int main(int argc, char** argv) { return permacheck::parse_and_dispatch(argc, argv, std::cout, std::cerr); }
