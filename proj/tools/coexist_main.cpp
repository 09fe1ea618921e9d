#include "coexist/cli.hpp"

int main(int argc, char** argv) { return coexist::cli::parse_and_dispatch(argc, argv); }
