#include "pcapanon/cli.hpp"

int main(int argc, char** argv) { return pcapanon::run_cli(argc, argv); }
