#include "r2csl/cli.hpp"

int main(int argc, char** argv) { return r2csl::cli::dispatch(argc, argv); }
