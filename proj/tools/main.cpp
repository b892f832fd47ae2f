#include "spectral_econ/cli.hpp"

int main(int argc, char** argv) { return spectral_econ::cli::run(argc, argv); }
