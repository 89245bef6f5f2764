#include "rlcsim/cli.hpp"

int main(int argc, char** argv) { return rlcsim::run(argc, argv); }
