#include "dnspde/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return dnspde::run_cli(argc, argv, std::cout, std::cerr);
}
