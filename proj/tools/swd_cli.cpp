#include <iostream>

#include "swd/app.hpp"

int main(int argc, char** argv) { return swd::run_cli(argc, argv, std::cout, std::cerr); }
