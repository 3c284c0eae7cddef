#include "mixsim/cli.hpp"

int main(int argc, char** argv) { return mixsim::cli_main(argc, argv); }
