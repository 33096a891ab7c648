#include "ellipsum/cli.hpp"

int main(int argc, char** argv) { return ellipsum::cli::cli_main(argc, argv); }
