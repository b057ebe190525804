#include <iostream>
#include <string>
#include <vector>

#include "tapeopt/bench.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        const tapeopt::bench::ExperimentSpec spec = tapeopt::bench::parse_config(args);
        return tapeopt::bench::run_experiment(spec);
    } catch (const tapeopt::bench::UsageError& e) {
        (e.exit_code == 0 ? std::cout : std::cerr) << e.what() << std::endl;
        return e.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "beambench: " << e.what() << std::endl;
        return 1;
    }
}
