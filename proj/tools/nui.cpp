#include "nui/cli.hpp"

int main(int argc, char** argv) { return nui::cli::run(argc, argv); }
