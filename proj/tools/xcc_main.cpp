#include "xcc/cli/commands.hpp"

int main(int argc, char** argv) { return xcc::cli::run_cli(argc, argv); }
