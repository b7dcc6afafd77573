#include <iostream>

#include "slopesize/cli.hpp"

int main(int argc, char** argv) {
    return slopesize::cli::run(argc, argv, std::cout, std::cerr);
}
