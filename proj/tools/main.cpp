#include "tracekit/cli.hpp"

int main(int argc, char** argv) { return tracekit::cli_main(argc, argv); }
