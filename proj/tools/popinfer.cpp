#include "popinfer/cli/commands.hpp"

int main(int argc, char** argv) { return popinfer::cli::run(argc, argv); }
