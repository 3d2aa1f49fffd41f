#include <iostream>

#include "pimsim/driver.hpp"

int main(int argc, char** argv) { return pimsim::run_cli(argc, argv, std::cout, std::cerr); }
