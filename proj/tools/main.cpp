#include "qoct/cli.hpp"

int main(int argc, char** argv) { return qoct::run_cli(argc, argv); }
