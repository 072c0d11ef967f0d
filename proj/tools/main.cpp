#include "cli.hpp"

int main(int argc, char** argv) { return qrnn::cli::run_cli(argc, argv); }
