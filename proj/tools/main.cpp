#include "xfer/cli.hpp"

int main(int argc, char** argv) { return xfer::cli::run(argc, argv); }
