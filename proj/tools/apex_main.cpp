#include "apex/harness.hpp"

int main(int argc, char** argv) { return apex::run_cli(argc, argv); }
