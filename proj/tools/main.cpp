#include "cli.hpp"

int main(int argc, char** argv) { return qgt::cli::run(argc, argv); }
