#include "calu/cli.hpp"

int main(int argc, char** argv) { return calu::cli::run(argc, argv); }
