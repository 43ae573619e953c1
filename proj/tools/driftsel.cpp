#include "driftsel/cli.hpp"

int main(int argc, char** argv) { return driftsel::run_cli(argc, argv); }
