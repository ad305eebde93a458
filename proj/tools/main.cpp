#include "ltrlab/cli.hpp"

int main(int argc, char** argv) { return ltrlab::cli::run(argc, argv); }
