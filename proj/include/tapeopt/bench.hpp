#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tapeopt/beamforming.hpp"
#include "tapeopt/channels.hpp"
#include "tapeopt/optim.hpp"

namespace tapeopt::bench {

enum class ExperimentKind { Convergence, RestartSweep, NSweep, Timing, Single };

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::Single;
    SystemDims dims{8, 4, 64};
    double snr_db = 20.0;
    double rician_eps = 10.0;
    channels::PathlossMode pathloss_mode = channels::PathlossMode::Normalized;
    optim::TrainConfig train;  // adam, lr 0.1, patience 25, max_iters 5000
    int restarts = 1;
    int scenarios = 1;
    int baseline_samples = 8;
    std::uint64_t seed = 1;
    std::vector<int> restart_grid{1, 2, 4, 8};
    std::vector<std::size_t> n_grid{8, 16, 32, 64};
    bool full_grid = false;  // extended N grid up to 144
    std::string out_path;
    std::string scenario_path;         // replay a saved scenario (single)
    std::string export_scenario_path;  // write the generated scenario (single)
};

// Bad flags, bad config keys or --help. exit_code 0 means "help requested".
class UsageError : public std::runtime_error {
public:
    UsageError(std::string message, int code) : std::runtime_error(std::move(message)),
                                                exit_code(code) {}
    int exit_code;
};

// Flags override config-file values; unknown config keys are rejected; no
// arguments at all prints usage and exits nonzero.
ExperimentSpec parse_config(const std::vector<std::string>& args);

// In-memory CSV with deterministic (shortest round-trip) number formatting.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string to_string() const;
    void write_file(const std::string& path) const;

    static std::string fmt(double v);
    static std::string fmt(std::uint64_t v);
    static std::string fmt(int v);
};

// Seeds for scenario s of an experiment: one stream for channel generation,
// a decorrelated one for initialization.
std::uint64_t scenario_seed(std::uint64_t base, int s);
std::uint64_t train_seed(std::uint64_t base, int s);

// Best sum rate over `samples` random phase draws with MRT beamforming at
// equal per-user power; the stand-in comparator for the solver.
double baseline_random_mrt(const ChannelSet& channels, int samples, std::uint64_t seed);

struct ConvergenceEntry {
    std::string optimizer;
    double lr = 0.0;
    optim::TrainTrace trace;
    double final_rate = 0.0;  // recomputed from the recovered solution
};

struct ConvergenceResult {
    CsvTable csv;
    std::vector<ConvergenceEntry> entries;
    bool all_finite = true;
};
ConvergenceResult run_convergence(const ExperimentSpec& spec);

struct RestartSweepResult {
    CsvTable csv;
    std::vector<int> k_values;
    std::vector<std::vector<double>> rates;  // [scenario][k index] best-of-k
    std::vector<double> mean_rates;          // per k
    bool all_finite = true;
};
RestartSweepResult run_restart_sweep(const ExperimentSpec& spec);

struct NSweepResult {
    CsvTable csv;
    std::vector<std::size_t> n_values;
    std::vector<double> mean_solve_rates;
    std::vector<double> mean_baseline_rates;
    bool all_finite = true;
};
NSweepResult run_n_sweep(const ExperimentSpec& spec);

struct TimingEntry {
    SystemDims dims;
    double mean_seconds = 0.0;
    double stddev_seconds = 0.0;
    double mean_iterations = 0.0;
};

struct TimingResult {
    CsvTable csv;
    std::vector<TimingEntry> entries;
    bool all_finite = true;
};
TimingResult run_timing(const ExperimentSpec& spec);

struct SingleResult {
    CsvTable csv;
    beamforming::Solution solution;
    bool all_finite = true;
};
SingleResult run_single(const ExperimentSpec& spec);

// Dispatches on spec.kind, writes spec.out_path if set. Returns the process
// exit code: 0 iff every run completed with finite losses.
int run_experiment(const ExperimentSpec& spec);

}  // namespace tapeopt::bench
