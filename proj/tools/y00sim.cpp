#include "y00/cli.hpp"

int main(int argc, char** argv) { return y00::cli::run(argc, argv); }
