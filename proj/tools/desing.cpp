#include "desing/cli.hpp"

int main(int argc, char** argv) { return desing::cli::main_entry(argc, argv); }
