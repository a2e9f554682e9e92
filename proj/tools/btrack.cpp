#include <iostream>
#include <string>
#include <vector>

#include "backtrack/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return backtrack::cli::run(args, std::cout, std::cerr);
}
