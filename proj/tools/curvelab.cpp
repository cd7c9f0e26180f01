#include "curvelab/cli.hpp"

int main(int argc, char** argv) { return curvelab::cli_main(argc, argv); }
