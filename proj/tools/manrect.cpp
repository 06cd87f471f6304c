#include "manrect/cli.hpp"

int main(int argc, char** argv) { return manrect::run_cli(argc, argv); }
