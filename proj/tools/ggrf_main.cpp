#include <iostream>

#include "ggrf/cli.hpp"

int main(int argc, char** argv) {
    return ggrf::run_cli(argc, argv, std::cout, std::cerr);
}
