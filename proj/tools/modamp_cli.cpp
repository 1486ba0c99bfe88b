#include "modamp/cli.hpp"

int main(int argc, char** argv) { return modamp::cli::run(argc, argv); }
