#include <qdirac/cli.hpp>

int main(int argc, char** argv) { return qdirac::cli::main(argc, argv); }
