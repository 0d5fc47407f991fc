#include <iostream>
#include <string>
#include <vector>

#include "iotforge/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return iotforge::run_cli(args, std::cout, std::cerr);
}
