#include "daisyforge/cli.hpp"

int main(int argc, char** argv) {
    return daisyforge::cli_main(argc, argv);
}
