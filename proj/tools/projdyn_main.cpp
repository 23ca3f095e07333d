#include <iostream>
#include <string>
#include <vector>

#include "projdyn/report.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return projdyn::run_command(args, std::cout, std::cerr);
}
