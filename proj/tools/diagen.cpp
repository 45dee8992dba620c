// SPDX-License-Identifier: MIT

#include "cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return diagen::cli::run(std::move(args));
}
