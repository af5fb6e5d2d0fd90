#include <iostream>

#include "sigrule/cli.hpp"

int main(int argc, char** argv) { return sigrule::cli::run(argc, argv, std::cout, std::cerr); }
