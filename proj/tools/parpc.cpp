#include "parpc_app.hpp"

int main(int argc, char** argv) { return parpc::cli::run(argc, argv); }
