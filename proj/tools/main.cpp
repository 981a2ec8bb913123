#include "cli.hpp"

int main(int argc, char** argv) { return amf::cli::run(argc, argv); }
