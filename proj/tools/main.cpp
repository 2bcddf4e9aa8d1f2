#include "pointclimb/cli.hpp"

int main(int argc, char** argv) { return pointclimb::cli_main(argc, argv); }
