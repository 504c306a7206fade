#include "gcmax/cli.hpp"

int main(int argc, char** argv) { return gcmax::cli::main_entry(argc, argv); }
