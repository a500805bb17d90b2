#include <iostream>

#include "pilotwave/cli.hpp"

int main(int argc, char** argv) { return pilotwave::cli::run(argc, argv, std::cout, std::cerr); }
