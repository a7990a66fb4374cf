#include "nmfhmm/cli.h"

int main(int argc, char** argv) {
  return nmfhmm::cli::run(argc, argv);
}
