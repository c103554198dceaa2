#include <iostream>

#include "bcpc/service.hpp"

int main(int argc, char** argv) { return bcpc::run_cli(argc, argv, std::cout, std::cerr); }
