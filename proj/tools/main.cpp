#include "cli.hpp"

int main(int argc, char** argv) { return bpop::cli::run(argc, argv); }
