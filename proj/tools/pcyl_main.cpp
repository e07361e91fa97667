#include "pcyl/cli.hpp"

int main(int argc, char** argv) { return pcyl::run_cli(argc, argv); }
