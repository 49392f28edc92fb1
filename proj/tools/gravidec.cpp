#include <iostream>
#include <string>
#include <vector>

#include "gravidec/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gravidec::run_cli(args, std::cout, std::cerr);
}
