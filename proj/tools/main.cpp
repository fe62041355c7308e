#include "bdcutoff/cli.hpp"

int main(int argc, char** argv) { return bdcutoff::cli_main(argc, argv); }
