#include <iostream>

#include "posemetric/cli.hpp"

int main(int argc, char** argv) {
    posemetric::cli::Context ctx{std::cout, std::cerr};
    return posemetric::cli::run(std::vector<std::string>(argv, argv + argc), ctx);
}
