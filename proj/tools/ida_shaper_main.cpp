#include "idashaper/runner.hpp"

int main(int argc, char** argv) {
    return idashaper::run_cli(argc, argv);
}
