#include "circtz/cli.hpp"

int main(int argc, char** argv) { return circtz::cli::run(argc, argv); }
