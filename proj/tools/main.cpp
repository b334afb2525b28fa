#include <string>
#include <vector>

#include "gcl/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gcl::run_cli(args);
}
