#pragma once

#include <cstdint>

#include "tapeopt/rng.hpp"
#include "tapeopt/tensor.hpp"

namespace tapeopt {

struct SystemDims {
    std::size_t bs_antennas = 8;    // M
    std::size_t users = 4;          // K
    std::size_t irs_elements = 64;  // N
};

// One problem instance: BS-IRS channel G (N x M), stacked IRS-user rows
// Hr (K x N), noise variance and transmit power budget, all linear.
struct ChannelSet {
    SystemDims dims;
    Tensor G;
    Tensor Hr;
    double sigma2 = 1.0;
    double p_max = 1.0;
};

namespace channels {

enum class PathlossMode { Normalized, Absolute };

struct ScenarioConfig {
    SystemDims dims;
    double rician_eps = 10.0;         // may be +inf for pure line of sight
    double bs_irs_distance_m = 200.0;
    double user_ring_distance_m = 30.0;
    double user_ring_radius_m = 10.0;
    double tx_snr_db = 20.0;          // P_max / sigma^2 in dB
    PathlossMode pathloss_mode = PathlossMode::Normalized;
    std::uint64_t seed = 1;
};

struct AngleSet {
    double irs_arrival = 0.0;             // nu
    double bs_departure = 0.0;            // phi
    std::vector<double> irs_departures;   // zeta_k, one per user
};

// 35.6 + 22 lg(d) dB for distance d in meters.
double path_loss_db(double distance_m);

// dB path loss to a linear amplitude factor.
double path_loss_amplitude(double pl_db);

// Half-wavelength ULA response: element m is e^{j pi (m-1) sin(angle)}.
Tensor steering(std::size_t n, double angle);

// What was drawn for one scenario besides the fading itself.
struct ScenarioDraw {
    AngleSet angles;
    std::vector<double> user_distances_m;
};

// Rician mixing of a line-of-sight term with CN(0,1) scattering, path losses
// applied as linear amplitudes. Deterministic per rng state.
ChannelSet gen_channels(const ScenarioConfig& config, Rng& rng, ScenarioDraw* draw = nullptr);

// Seeds the generator from config.seed.
ChannelSet gen_channels(const ScenarioConfig& config);

}  // namespace channels
}  // namespace tapeopt
