#include "noiseloom/cli.hpp"

int main(int argc, char** argv) { return noiseloom::cli_main(argc, argv); }
