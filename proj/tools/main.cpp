#include "lgdm/cli.hpp"

int main(int argc, char** argv) { return lgdm::cli::run(argc, argv); }
