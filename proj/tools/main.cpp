#include "piff/cli.hpp"

int main(int argc, char** argv) { return piff::run_cli(argc, argv); }
