#include "paran/cli.hpp"

int main(int argc, char** argv) { return paran::cli::dispatch(argc, argv); }
