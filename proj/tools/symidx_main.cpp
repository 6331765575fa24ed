#include "symidx/cli.hpp"

int main(int argc, char** argv) { return symidx::run_cli(argc, argv); }
