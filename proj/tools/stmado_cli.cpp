#include "commands.hpp"

int main(int argc, char** argv) { return stmado::cli::main_with_args(argc, argv); }
