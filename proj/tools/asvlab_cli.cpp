#include "asvlab/cli.hpp"

int main(int argc, char** argv) { return asvlab::cli::run_cli(argc, argv); }
