#include <string>
#include <vector>

#include "driftsync/cli.hpp"

int main(int argc, char** argv) {
  return driftsync::cli_main(std::vector<std::string>(argv + 1, argv + argc));
}
