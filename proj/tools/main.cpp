#include <iostream>

#include "dcm/cli.hpp"

int main(int argc, char** argv) { return dcm::cli_main(argc, argv, std::cout, std::cerr); }
