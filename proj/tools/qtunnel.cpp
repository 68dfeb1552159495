#include "qtunnel/cli.hpp"

int main(int argc, char** argv) { return qtunnel::cli::run(argc, argv); }
