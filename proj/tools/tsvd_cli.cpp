#include <iostream>

#include "tsvd/cli.hpp"

int main(int argc, char** argv)
{
    return tsvd::cli_main(argc, argv, std::cout, std::cerr);
}
