#include "fstirap/cli.hpp"

int main(int argc, char** argv)
{
    return fstirap::cli::run(argc, argv);
}
