#include <iostream>

#include "qdiff/cli.hpp"

int main(int argc, char** argv) { return qdiff::run_cli(argc, argv, std::cout, std::cerr); }
