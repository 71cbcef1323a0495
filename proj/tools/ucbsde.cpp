#include <iostream>

#include "ucbsde/cli.hpp"

int main(int argc, char** argv)
{
    return ucbsde::cli_main(argc, argv, std::cout, std::cerr);
}
