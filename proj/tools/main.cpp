#include <vector>

#include "anypath/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return anypath::run_cli(args);
}
