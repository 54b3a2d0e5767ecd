#include "gdyne/cli.hpp"

int main(int argc, char** argv) { return gdyne::cli::run(argc, argv); }
