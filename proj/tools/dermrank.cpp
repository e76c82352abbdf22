#include <iostream>

#include "dermrank/cli.hpp"

int main(int argc, char** argv) {
    return dermrank::cli::run(argc, argv, std::cout, std::cerr);
}
