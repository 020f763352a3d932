#include "cutform/cli.hpp"

int main(int argc, char** argv) { return cutform::run_cli({argv + 1, argv + argc}); }
