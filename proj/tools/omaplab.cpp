#include "omap/runner.hpp"

int main(int argc, char** argv) { return omap::cli::run_cli(argc, argv); }
