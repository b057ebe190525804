#include "tapeopt/channels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tapeopt::channels {

double path_loss_db(double distance_m) {
    if (distance_m <= 0.0) throw std::invalid_argument("path_loss_db: distance must be positive");
    return 35.6 + 22.0 * std::log10(distance_m);
}

double path_loss_amplitude(double pl_db) { return std::pow(10.0, -pl_db / 20.0); }

Tensor steering(std::size_t n, double angle) {
    if (n == 0) throw std::invalid_argument("steering: need at least one element");
    Tensor a = Tensor::zeros({n}, DType::Complex);
    const double s = std::sin(angle);
    for (std::size_t m = 0; m < n; ++m) {
        const double phase = std::numbers::pi * static_cast<double>(m) * s;
        a[m] = cdouble{std::cos(phase), std::sin(phase)};
    }
    return a;
}

namespace {

// LOS/NLOS mixing weights sqrt(eps/(eps+1)) and sqrt(1/(eps+1)); eps = +inf
// collapses to (1, 0) exactly.
std::pair<double, double> rician_weights(double eps) {
    if (std::isinf(eps)) return {1.0, 0.0};
    return {std::sqrt(eps / (eps + 1.0)), std::sqrt(1.0 / (eps + 1.0))};
}

}  // namespace

ChannelSet gen_channels(const ScenarioConfig& config, Rng& rng, ScenarioDraw* draw) {
    const std::size_t M = config.dims.bs_antennas;
    const std::size_t K = config.dims.users;
    const std::size_t N = config.dims.irs_elements;
    if (M == 0 || K == 0 || N == 0)
        throw std::invalid_argument("gen_channels: all dimensions must be >= 1");
    if (config.rician_eps < 0.0)
        throw std::invalid_argument("gen_channels: rician_eps must be >= 0");

    const auto [w_los, w_nlos] = rician_weights(config.rician_eps);

    AngleSet angles;
    angles.irs_arrival = rng.uniform(-std::numbers::pi / 2, std::numbers::pi / 2);
    angles.bs_departure = rng.uniform(-std::numbers::pi / 2, std::numbers::pi / 2);
    angles.irs_departures.resize(K);
    for (std::size_t k = 0; k < K; ++k)
        angles.irs_departures[k] = rng.uniform(-std::numbers::pi / 2, std::numbers::pi / 2);

    // Users uniform over the disk of radius r centered ring_distance from the
    // IRS; distances then fall in [ring_distance - r, ring_distance + r].
    std::vector<double> user_distance(K);
    for (std::size_t k = 0; k < K; ++k) {
        const double radius = config.user_ring_radius_m * std::sqrt(rng.uniform());
        const double alpha = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double x = config.user_ring_distance_m + radius * std::cos(alpha);
        const double y = radius * std::sin(alpha);
        user_distance[k] = std::hypot(x, y);
    }

    if (draw != nullptr) {
        draw->angles = angles;
        draw->user_distances_m = user_distance;
    }

    const double l1_db = path_loss_db(config.bs_irs_distance_m);
    const double l2_ref_db = path_loss_db(config.user_ring_distance_m);
    const double l1 = path_loss_amplitude(l1_db);

    ChannelSet cs;
    cs.dims = config.dims;

    const Tensor a_n = steering(N, angles.irs_arrival);
    const Tensor a_m = steering(M, angles.bs_departure);
    cs.G = Tensor::zeros({N, M}, DType::Complex);
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t m = 0; m < M; ++m) {
            const cdouble los = a_n[n] * std::conj(a_m[m]);
            const cdouble nlos = w_nlos > 0.0 ? rng.cnormal() : cdouble{0.0, 0.0};
            cs.G[n * M + m] = l1 * (w_los * los + w_nlos * nlos);
        }

    cs.Hr = Tensor::zeros({K, N}, DType::Complex);
    for (std::size_t k = 0; k < K; ++k) {
        const double l2 = path_loss_amplitude(path_loss_db(user_distance[k]));
        const Tensor a_zeta = steering(N, angles.irs_departures[k]);
        for (std::size_t n = 0; n < N; ++n) {
            const cdouble nlos = w_nlos > 0.0 ? rng.cnormal() : cdouble{0.0, 0.0};
            cs.Hr[k * N + n] = l2 * (w_los * a_zeta[n] + w_nlos * nlos);
        }
    }

    // Absolute mode: unit noise floor, budget straight from the SNR setting;
    // the literal path losses then push rates toward zero. Normalized mode
    // folds the reference cascade loss (BS-IRS times ring-center IRS-user)
    // into sigma^2 so the configured SNR is the effective post-path-loss SNR.
    cs.p_max = std::pow(10.0, config.tx_snr_db / 10.0);
    if (config.pathloss_mode == PathlossMode::Normalized) {
        const double ref_amp = l1 * path_loss_amplitude(l2_ref_db);
        cs.sigma2 = ref_amp * ref_amp;
    } else {
        cs.sigma2 = 1.0;
    }
    return cs;
}

ChannelSet gen_channels(const ScenarioConfig& config) {
    Rng rng(config.seed);
    return gen_channels(config, rng);
}

}  // namespace tapeopt::channels
