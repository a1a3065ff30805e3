#include <iostream>
#include <string>
#include <vector>

#include "longwatch/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return longwatch::cli::run(args, std::cout, std::cerr);
}
