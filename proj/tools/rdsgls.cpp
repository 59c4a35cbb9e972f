#include <iostream>

#include "rdsgls/cli.hpp"

int main(int argc, char** argv) { return rdsgls::dispatch(argc, argv, std::cout, std::cerr); }
