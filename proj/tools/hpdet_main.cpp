#include "hpdet/cli.hpp"

int main(int argc, char** argv) { return hpdet::cli::run(argc, argv); }
