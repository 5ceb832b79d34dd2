#include "cli.hpp"

int main(int argc, char** argv) { return hiforead::cli::run(argc, argv); }
