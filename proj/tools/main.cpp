#include <string>
#include <vector>

#include "vantage/cli.hpp"

int main(int argc, char** argv) {
    return vantage::cli::run(std::vector<std::string>(argv, argv + argc));
}
