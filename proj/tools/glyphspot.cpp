#include <vector>

#include "glyphspot/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return glyphspot::cli::run(args);
}
