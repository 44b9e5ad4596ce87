#include "liftgraph/commands.hpp"

int main(int argc, char** argv) { return liftgraph::run_cli(argc, argv); }
