#include "soco/cli/commands.hpp"

int main(int argc, char** argv) { return soco::cli::run_command(argc, argv); }
