#include "pks/driver.hpp"

int main(int argc, char** argv) { return pks::cli::run_cli(argc, argv); }
