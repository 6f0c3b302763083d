#include "cpctx/cli.hpp"

int main(int argc, char** argv) { return cpctx::cli::run(argc, argv); }
