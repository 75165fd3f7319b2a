#include "cli.hpp"

int main(int argc, char** argv) { return pnsr::cli::run(argc, argv); }
