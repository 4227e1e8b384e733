#include <iostream>
#include <string>
#include <vector>

#include "qmet/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return qmet::cli::run(std::move(args), std::cout, std::cerr);
}
