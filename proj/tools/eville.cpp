#include "eville/cli/run.hpp"

int main(int argc, char** argv) { return eville::cli::main(argc, argv); }
