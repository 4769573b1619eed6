#include "annulus_fixpoint/cli.hpp"

int main(int argc, char** argv) { return annulus::cli::run_cli(argc, argv); }
