#include "elltail/cli.hpp"

int main(int argc, char** argv) { return elltail::cli::run(argc, argv); }
