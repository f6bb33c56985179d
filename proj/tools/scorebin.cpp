#include "scorebin/cli.hpp"

int main(int argc, char** argv) { return scorebin::cli::run_cli(argc, argv); }
