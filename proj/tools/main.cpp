#include "qtrade/cli.hpp"

int main(int argc, char** argv) { return qtrade::run_cli(argc, argv); }
