#include "risfd/harness.hpp"

int main(int argc, char** argv) { return risfd::harness::cli_main(argc, argv); }
