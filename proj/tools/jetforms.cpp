#include "jetforms/cli.hpp"

int main(int argc, char** argv) { return jetforms::cli::run(argc, argv); }
