#include <exception>
#include <iostream>

#include "fracwave/cli.hpp"

int main(int argc, char** argv)
{
    fracwave::RunConfig config;
    try {
        config = fracwave::parse_args(argc, argv);
    } catch (const fracwave::ConfigError& e) {
        std::cerr << "fracwave: " << e.what() << "\n"
                  << "usage: fracwave --command <solve|temporal-study|spatial-study|caputo-check|bound-report> "
                     "[--key value ...] [--config file]\n";
        return 64;
    }
    return fracwave::run(config, std::cout, std::cerr);
}
