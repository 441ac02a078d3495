#include <vector>

#include "wag3d/pipeline/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return wag3d::run_cli(args);
}
