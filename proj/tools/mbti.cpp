#include "mbti/cli.hpp"

int main(int argc, char** argv) { return mbti::cli::run(argc, argv); }
