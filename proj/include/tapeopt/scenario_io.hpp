#pragma once

#include <iosfwd>
#include <string>

#include "tapeopt/channels.hpp"

namespace tapeopt::channels {

// Self-describing JSON scenario format: dims, seed, complex matrices as
// [re, im] pairs, sigma2 and p_max. Round-trips doubles exactly, so a saved
// scenario replays byte-for-byte.
void save_scenario(std::ostream& out, const ChannelSet& cs, std::uint64_t seed);
void save_scenario_file(const std::string& path, const ChannelSet& cs, std::uint64_t seed);

struct LoadedScenario {
    ChannelSet channels;
    std::uint64_t seed = 0;
};

LoadedScenario load_scenario(std::istream& in);
LoadedScenario load_scenario_file(const std::string& path);

}  // namespace tapeopt::channels
