#include <hdcap/cli.hpp>

#include <iostream>

int main(int argc, char** argv) { return hdcap::run_cli(argc, argv, std::cout, std::cerr); }
