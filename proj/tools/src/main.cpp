#include "riftlab/dispatch.hpp"

int main(int argc, char** argv) {
    return rift::cli::dispatch(argc, argv);
}
