#include "cli.hpp"

int main(int argc, char** argv)
{
  return bcamap::cli::cli_main(argc, argv);
}
