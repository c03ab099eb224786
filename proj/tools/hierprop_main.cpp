#include "hierprop/cli.hpp"

int main(int argc, char** argv) { return hierprop::cli::run(argc, argv); }
