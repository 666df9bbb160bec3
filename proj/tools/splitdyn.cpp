#include "splitdyn/cli/commands.hpp"

int main(int argc, char** argv) { return splitdyn::cli::run_cli(argc, argv); }
