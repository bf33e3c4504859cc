#include "safemap/cli.hpp"

int main(int argc, char** argv) { return safemap::run_cli(argc, argv); }
