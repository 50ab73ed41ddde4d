#include "blockdyn/cli.hpp"

int main(int argc, char** argv) { return blockdyn::cli::dispatch(argc, argv); }
