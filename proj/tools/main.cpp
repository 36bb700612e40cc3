#include "harness.hpp"

int main(int argc, char** argv) { return stabreg::cli::run_cli(argc, argv); }
