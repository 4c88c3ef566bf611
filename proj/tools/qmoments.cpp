#include "qmoments/cli/app.hpp"

int main(int argc, char** argv) { return qmoments::cli::run(argc, argv, std::cout, std::cerr); }
