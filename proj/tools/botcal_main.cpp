#include <iostream>
#include <string>
#include <vector>

#include "botcal/cli.hpp"

int main(int argc, char** argv) {
    return botcal::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
