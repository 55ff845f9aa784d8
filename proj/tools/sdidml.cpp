#include "sdidml/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return sdidml::run_cli(argc, argv, std::cout, std::cerr); }
