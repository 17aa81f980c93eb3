#include "svarkit/cli.hpp"

int main(int argc, char** argv) { return svarkit::cli::run(argc, argv); }
