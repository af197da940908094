#include "sonotrans/cli/commands.hpp"

int main(int argc, char** argv) { return sonotrans::cli::run_cli(argc, argv); }
