#include "agora/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return agora::cli::main(argc, argv, std::cout, std::cerr);
}
