#include "cli.hpp"

int main(int argc, char** argv) { return gribov::cli::main_entry(argc, argv); }
