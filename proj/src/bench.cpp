#include "tapeopt/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>

#include <CLI11.hpp>
#include <json.hpp>

#include "tapeopt/scenario_io.hpp"

namespace tapeopt::bench {

namespace {

using beamforming::Solution;
using beamforming::SumRateProblem;
using channels::PathlossMode;
using channels::ScenarioConfig;

std::string kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Convergence: return "convergence";
        case ExperimentKind::RestartSweep: return "restart_sweep";
        case ExperimentKind::NSweep: return "n_sweep";
        case ExperimentKind::Timing: return "timing";
        case ExperimentKind::Single: return "single";
    }
    return "single";
}

ExperimentKind kind_from(const std::string& s) {
    if (s == "convergence") return ExperimentKind::Convergence;
    if (s == "restart_sweep") return ExperimentKind::RestartSweep;
    if (s == "n_sweep") return ExperimentKind::NSweep;
    if (s == "timing") return ExperimentKind::Timing;
    if (s == "single") return ExperimentKind::Single;
    throw UsageError("unknown experiment kind: " + s, 2);
}

ScenarioConfig scenario_config(const ExperimentSpec& spec, SystemDims dims, std::uint64_t seed) {
    ScenarioConfig c;
    c.dims = dims;
    c.rician_eps = spec.rician_eps;
    c.tx_snr_db = spec.snr_db;
    c.pathloss_mode = spec.pathloss_mode;
    c.seed = seed;
    return c;
}

bool trace_ok(const optim::TrainTrace& t) { return t.stop_reason != "non_finite_loss"; }

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string CsvTable::fmt(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::string CsvTable::fmt(std::uint64_t v) { return std::to_string(v); }
std::string CsvTable::fmt(int v) { return std::to_string(v); }

std::string CsvTable::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ",";
        out += header[i];
    }
    out += "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            out += row[i];
        }
        out += "\n";
    }
    return out;
}

void CsvTable::write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("CsvTable: cannot open " + path);
    out << to_string();
}

std::uint64_t scenario_seed(std::uint64_t base, int s) {
    return Rng::derive(base, 2 * static_cast<std::uint64_t>(s));
}

std::uint64_t train_seed(std::uint64_t base, int s) {
    return Rng::derive(base, 2 * static_cast<std::uint64_t>(s) + 1);
}

double baseline_random_mrt(const ChannelSet& cs, int samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("baseline_random_mrt: samples must be >= 1");
    const std::size_t m = cs.dims.bs_antennas, k = cs.dims.users, n = cs.dims.irs_elements;
    Rng rng(seed);
    double best = 0.0;
    for (int s = 0; s < samples; ++s) {
        Tensor theta = Tensor::zeros({n}, DType::Complex);
        for (std::size_t i = 0; i < n; ++i) {
            const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
            theta[i] = cdouble{std::cos(phi), std::sin(phi)};
        }
        const Tensor h = beamforming::effective_channel(cs.G, cs.Hr, theta);
        // MRT per user at equal power split: w_i = sqrt(p/K) h_i^H / |h_i|.
        Tensor w = Tensor::zeros({m, k}, DType::Complex);
        for (std::size_t u = 0; u < k; ++u) {
            double norm2 = 0.0;
            for (std::size_t c = 0; c < m; ++c) norm2 += std::norm(h.at(u, c));
            if (norm2 == 0.0) continue;
            const double scale = std::sqrt(cs.p_max / static_cast<double>(k) / norm2);
            for (std::size_t c = 0; c < m; ++c) w.at(c, u) = std::conj(h.at(u, c)) * scale;
        }
        best = std::max(best, beamforming::sum_rate(h, w, cs.sigma2));
    }
    return best;
}

ConvergenceResult run_convergence(const ExperimentSpec& spec) {
    const ChannelSet cs = channels::gen_channels(
        scenario_config(spec, spec.dims, scenario_seed(spec.seed, 0)));
    SumRateProblem problem(cs);
    Rng init_rng(train_seed(spec.seed, 0));
    const std::vector<Tensor> init = problem.sample_init(init_rng);

    struct Setup {
        optim::OptimizerKind opt;
        const char* name;
        double lr;
    };
    const Setup setups[] = {
        {optim::OptimizerKind::Sgd, "sgd", 1.0},
        {optim::OptimizerKind::Sgd, "sgd", 0.1},
        {optim::OptimizerKind::Sgd, "sgd", 0.001},
        {optim::OptimizerKind::Adam, "adam", 0.1},
    };

    ConvergenceResult res;
    res.csv.header = {"record", "optimizer", "lr", "iter", "loss", "sum_rate"};
    for (const Setup& s : setups) {
        optim::TrainConfig cfg = spec.train;
        cfg.optimizer = s.opt;
        cfg.lr = s.lr;
        optim::TrainResult r = optim::train(problem, init, cfg);
        const Solution sol = beamforming::solution_from_leaves(cs, r.best_leaves);

        for (std::size_t i = 0; i < r.trace.losses.size(); ++i) {
            const double loss = r.trace.losses[i];
            res.csv.rows.push_back({"trace", s.name, CsvTable::fmt(s.lr),
                                    CsvTable::fmt(static_cast<int>(i + 1)), CsvTable::fmt(loss),
                                    CsvTable::fmt(-loss)});
        }
        res.csv.rows.push_back({"summary", s.name, CsvTable::fmt(s.lr),
                                CsvTable::fmt(r.trace.iterations_run),
                                CsvTable::fmt(r.trace.best_loss), CsvTable::fmt(sol.sum_rate)});
        res.all_finite = res.all_finite && trace_ok(r.trace) && std::isfinite(sol.sum_rate);
        res.entries.push_back({s.name, s.lr, std::move(r.trace), sol.sum_rate});
    }
    return res;
}

RestartSweepResult run_restart_sweep(const ExperimentSpec& spec) {
    RestartSweepResult res;
    res.k_values = spec.restart_grid;
    const int kmax = *std::max_element(res.k_values.begin(), res.k_values.end());

    res.csv.header = {"record", "scenario", "k", "sum_rate"};
    res.rates.resize(spec.scenarios);
    for (int s = 0; s < spec.scenarios; ++s) {
        const ChannelSet cs = channels::gen_channels(
            scenario_config(spec, spec.dims, scenario_seed(spec.seed, s)));
        SumRateProblem problem(cs);
        const std::uint64_t ts = train_seed(spec.seed, s);

        // One pool of kmax runs; best-of-k over the first k of them matches
        // multi_restart(k, ts) exactly (nested seed streams).
        std::vector<double> losses(kmax), rates(kmax);
        for (int run = 0; run < kmax; ++run) {
            Rng rng(Rng::derive(ts, static_cast<std::uint64_t>(run)));
            optim::TrainResult r = optim::train(problem, problem.sample_init(rng), spec.train);
            losses[run] = r.trace.best_loss;
            rates[run] = beamforming::solution_from_leaves(cs, r.best_leaves).sum_rate;
            res.all_finite = res.all_finite && trace_ok(r.trace);
        }
        for (int k : res.k_values) {
            int best = 0;
            for (int run = 1; run < k; ++run)
                if (losses[run] < losses[best]) best = run;
            res.rates[s].push_back(rates[best]);
            res.csv.rows.push_back({"run", CsvTable::fmt(s), CsvTable::fmt(k),
                                    CsvTable::fmt(rates[best])});
        }
    }
    for (std::size_t ki = 0; ki < res.k_values.size(); ++ki) {
        std::vector<double> col;
        for (int s = 0; s < spec.scenarios; ++s) col.push_back(res.rates[s][ki]);
        res.mean_rates.push_back(mean(col));
        res.csv.rows.push_back({"mean", "", CsvTable::fmt(res.k_values[ki]),
                                CsvTable::fmt(res.mean_rates.back())});
    }
    return res;
}

NSweepResult run_n_sweep(const ExperimentSpec& spec) {
    NSweepResult res;
    res.n_values = spec.full_grid
                       ? std::vector<std::size_t>{16, 32, 48, 64, 80, 96, 112, 128, 144}
                       : spec.n_grid;
    res.csv.header = {"record", "n", "scenario", "method", "sum_rate", "iterations"};

    for (std::size_t ni = 0; ni < res.n_values.size(); ++ni) {
        SystemDims dims = spec.dims;
        dims.irs_elements = res.n_values[ni];
        std::vector<double> solve_rates, baseline_rates;
        for (int s = 0; s < spec.scenarios; ++s) {
            const int idx = static_cast<int>(ni) * spec.scenarios + s;
            const ChannelSet cs = channels::gen_channels(
                scenario_config(spec, dims, scenario_seed(spec.seed, idx)));

            beamforming::SolveConfig sc;
            sc.train = spec.train;
            sc.restarts = spec.restarts;
            sc.seed = train_seed(spec.seed, idx);
            const Solution sol = beamforming::solve(cs, sc);
            solve_rates.push_back(sol.sum_rate);
            res.all_finite = res.all_finite && trace_ok(sol.trace) && std::isfinite(sol.sum_rate);
            res.csv.rows.push_back({"run", CsvTable::fmt(static_cast<std::uint64_t>(dims.irs_elements)),
                                    CsvTable::fmt(s), "solve", CsvTable::fmt(sol.sum_rate),
                                    CsvTable::fmt(sol.trace.iterations_run)});

            const double base = baseline_random_mrt(cs, spec.baseline_samples,
                                                    Rng::derive(train_seed(spec.seed, idx), 0xB));
            baseline_rates.push_back(base);
            res.csv.rows.push_back({"run", CsvTable::fmt(static_cast<std::uint64_t>(dims.irs_elements)),
                                    CsvTable::fmt(s), "random_mrt", CsvTable::fmt(base), "0"});
        }
        res.mean_solve_rates.push_back(mean(solve_rates));
        res.mean_baseline_rates.push_back(mean(baseline_rates));
        res.csv.rows.push_back({"mean", CsvTable::fmt(static_cast<std::uint64_t>(dims.irs_elements)),
                                "", "solve", CsvTable::fmt(res.mean_solve_rates.back()), ""});
        res.csv.rows.push_back({"mean", CsvTable::fmt(static_cast<std::uint64_t>(dims.irs_elements)),
                                "", "random_mrt", CsvTable::fmt(res.mean_baseline_rates.back()), ""});
    }
    return res;
}

TimingResult run_timing(const ExperimentSpec& spec) {
    // Timing grid, listed as (M, N, K): (4,64,2) (8,64,2) (8,128,2) (8,128,4).
    const SystemDims grid[] = {{4, 2, 64}, {8, 2, 64}, {8, 2, 128}, {8, 4, 128}};
    TimingResult res;
    res.csv.header = {"record", "m", "n", "k", "scenario", "seconds", "iterations", "sum_rate"};

    for (std::size_t g = 0; g < std::size(grid); ++g) {
        const SystemDims dims = grid[g];
        std::vector<double> secs, iters;
        for (int s = 0; s < spec.scenarios; ++s) {
            const int idx = static_cast<int>(g) * spec.scenarios + s;
            const ChannelSet cs = channels::gen_channels(
                scenario_config(spec, dims, scenario_seed(spec.seed, idx)));
            beamforming::SolveConfig sc;
            sc.train = spec.train;
            sc.restarts = spec.restarts;
            sc.seed = train_seed(spec.seed, idx);

            const auto t0 = std::chrono::steady_clock::now();
            const Solution sol = beamforming::solve(cs, sc);
            const auto t1 = std::chrono::steady_clock::now();
            const double sec = std::chrono::duration<double>(t1 - t0).count();

            secs.push_back(sec);
            iters.push_back(static_cast<double>(sol.trace.iterations_run));
            res.all_finite = res.all_finite && trace_ok(sol.trace);
            res.csv.rows.push_back({"run", CsvTable::fmt(static_cast<std::uint64_t>(dims.bs_antennas)),
                                    CsvTable::fmt(static_cast<std::uint64_t>(dims.irs_elements)),
                                    CsvTable::fmt(static_cast<std::uint64_t>(dims.users)),
                                    CsvTable::fmt(s), CsvTable::fmt(sec),
                                    CsvTable::fmt(sol.trace.iterations_run),
                                    CsvTable::fmt(sol.sum_rate)});
        }
        TimingEntry e;
        e.dims = dims;
        e.mean_seconds = mean(secs);
        e.stddev_seconds = stddev(secs);
        e.mean_iterations = mean(iters);
        res.entries.push_back(e);
        res.csv.rows.push_back({"mean", CsvTable::fmt(static_cast<std::uint64_t>(dims.bs_antennas)),
                                CsvTable::fmt(static_cast<std::uint64_t>(dims.irs_elements)),
                                CsvTable::fmt(static_cast<std::uint64_t>(dims.users)), "",
                                CsvTable::fmt(e.mean_seconds), CsvTable::fmt(e.mean_iterations),
                                ""});
        res.csv.rows.push_back({"stddev", CsvTable::fmt(static_cast<std::uint64_t>(dims.bs_antennas)),
                                CsvTable::fmt(static_cast<std::uint64_t>(dims.irs_elements)),
                                CsvTable::fmt(static_cast<std::uint64_t>(dims.users)), "",
                                CsvTable::fmt(e.stddev_seconds), "", ""});
    }
    return res;
}

SingleResult run_single(const ExperimentSpec& spec) {
    ChannelSet cs;
    std::uint64_t ch_seed = scenario_seed(spec.seed, 0);
    if (!spec.scenario_path.empty()) {
        auto loaded = channels::load_scenario_file(spec.scenario_path);
        cs = std::move(loaded.channels);
        ch_seed = loaded.seed;
    } else {
        cs = channels::gen_channels(scenario_config(spec, spec.dims, ch_seed));
    }
    if (!spec.export_scenario_path.empty())
        channels::save_scenario_file(spec.export_scenario_path, cs, ch_seed);

    beamforming::SolveConfig sc;
    sc.train = spec.train;
    sc.restarts = spec.restarts;
    sc.seed = train_seed(spec.seed, 0);

    SingleResult res;
    res.solution = beamforming::solve(cs, sc);
    res.all_finite = trace_ok(res.solution.trace) && std::isfinite(res.solution.sum_rate);
    res.csv.header = {"m", "k", "n", "seed", "iterations", "stop_reason", "sum_rate"};
    res.csv.rows.push_back({CsvTable::fmt(static_cast<std::uint64_t>(cs.dims.bs_antennas)),
                            CsvTable::fmt(static_cast<std::uint64_t>(cs.dims.users)),
                            CsvTable::fmt(static_cast<std::uint64_t>(cs.dims.irs_elements)),
                            CsvTable::fmt(spec.seed),
                            CsvTable::fmt(res.solution.trace.iterations_run),
                            res.solution.trace.stop_reason,
                            CsvTable::fmt(res.solution.sum_rate)});
    return res;
}

namespace {

void emit(const CsvTable& csv, const ExperimentSpec& spec) {
    if (spec.out_path.empty())
        std::cout << csv.to_string();
    else
        csv.write_file(spec.out_path);
}

void apply_json_config(const std::string& path, ExperimentSpec& spec) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path, 2);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
        throw UsageError("config file is not valid JSON: " + std::string(e.what()), 2);
    }
    if (!j.is_object()) throw UsageError("config file must hold a JSON object", 2);
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "kind") spec.kind = kind_from(value.get<std::string>());
            else if (key == "m") spec.dims.bs_antennas = value.get<std::size_t>();
            else if (key == "k") spec.dims.users = value.get<std::size_t>();
            else if (key == "n") spec.dims.irs_elements = value.get<std::size_t>();
            else if (key == "snr_db") spec.snr_db = value.get<double>();
            else if (key == "rician_eps") spec.rician_eps = value.get<double>();
            else if (key == "lr") spec.train.lr = value.get<double>();
            else if (key == "optimizer") {
                const std::string o = value.get<std::string>();
                if (o != "adam" && o != "sgd") throw UsageError("optimizer must be adam or sgd", 2);
                spec.train.optimizer = o == "adam" ? optim::OptimizerKind::Adam
                                                   : optim::OptimizerKind::Sgd;
            }
            else if (key == "patience") spec.train.patience = value.get<int>();
            else if (key == "max_iters") spec.train.max_iters = value.get<int>();
            else if (key == "restarts") spec.restarts = value.get<int>();
            else if (key == "scenarios") spec.scenarios = value.get<int>();
            else if (key == "baseline_samples") spec.baseline_samples = value.get<int>();
            else if (key == "seed") spec.seed = value.get<std::uint64_t>();
            else if (key == "pathloss_mode") {
                const std::string p = value.get<std::string>();
                if (p == "normalized") spec.pathloss_mode = PathlossMode::Normalized;
                else if (p == "absolute") spec.pathloss_mode = PathlossMode::Absolute;
                else throw UsageError("pathloss_mode must be normalized or absolute", 2);
            }
            else if (key == "out") spec.out_path = value.get<std::string>();
            else if (key == "restart_grid") spec.restart_grid = value.get<std::vector<int>>();
            else if (key == "n_grid") spec.n_grid = value.get<std::vector<std::size_t>>();
            else if (key == "full_grid") spec.full_grid = value.get<bool>();
            else if (key == "scenario") spec.scenario_path = value.get<std::string>();
            else if (key == "export_scenario") spec.export_scenario_path = value.get<std::string>();
            else throw UsageError("unknown config key: " + key, 2);
        }
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError("bad config value: " + std::string(e.what()), 2);
    }
}

void validate_spec(const ExperimentSpec& spec) {
    auto fail = [](const std::string& m) { throw UsageError(m, 2); };
    if (spec.dims.bs_antennas < 1) fail("m must be >= 1");
    if (spec.dims.users < 1) fail("k must be >= 1");
    if (spec.dims.irs_elements < 1) fail("n must be >= 1");
    if (spec.rician_eps < 0.0) fail("rician_eps must be >= 0");
    if (spec.train.lr <= 0.0) fail("lr must be > 0");
    if (spec.train.patience < 1) fail("patience must be >= 1");
    if (spec.train.max_iters < 1) fail("max_iters must be >= 1");
    if (spec.restarts < 1) fail("restarts must be >= 1");
    if (spec.scenarios < 1) fail("scenarios must be >= 1");
    if (spec.baseline_samples < 1) fail("baseline_samples must be >= 1");
    if (spec.restart_grid.empty()) fail("restart_grid must not be empty");
    for (int k : spec.restart_grid)
        if (k < 1) fail("restart_grid entries must be >= 1");
    if (spec.n_grid.empty()) fail("n_grid must not be empty");
    for (std::size_t n : spec.n_grid)
        if (n < 1) fail("n_grid entries must be >= 1");
}

}  // namespace

ExperimentSpec parse_config(const std::vector<std::string>& args) {
    ExperimentSpec spec;

    // Config file first, so flags can override its values.
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config requires a file path", 2);
            apply_json_config(args[i + 1], spec);
        } else if (args[i].rfind("--config=", 0) == 0) {
            apply_json_config(args[i].substr(9), spec);
        }
    }

    CLI::App app{"IRS-aided joint beamforming benchmark"};
    app.name("beambench");

    std::string kind = kind_name(spec.kind);
    long long m = static_cast<long long>(spec.dims.bs_antennas);
    long long k = static_cast<long long>(spec.dims.users);
    long long n = static_cast<long long>(spec.dims.irs_elements);
    std::string optimizer =
        spec.train.optimizer == optim::OptimizerKind::Adam ? "adam" : "sgd";
    std::string pathloss =
        spec.pathloss_mode == PathlossMode::Normalized ? "normalized" : "absolute";
    std::string config_path;

    app.add_option("--kind", kind, "experiment kind")
        ->check(CLI::IsMember({"convergence", "restart_sweep", "n_sweep", "timing", "single"}));
    app.add_option("--m", m, "BS antennas")->check(CLI::PositiveNumber);
    app.add_option("--k", k, "single-antenna users")->check(CLI::PositiveNumber);
    app.add_option("--n", n, "IRS reflecting elements")->check(CLI::PositiveNumber);
    app.add_option("--snr-db", spec.snr_db, "P_max / sigma^2 in dB");
    app.add_option("--rician-eps", spec.rician_eps, "Rician factor (inf = pure LOS)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--lr", spec.train.lr, "learning rate")->check(CLI::PositiveNumber);
    app.add_option("--optimizer", optimizer, "optimizer")->check(CLI::IsMember({"adam", "sgd"}));
    app.add_option("--patience", spec.train.patience, "stop after this many stalled iterations")
        ->check(CLI::PositiveNumber);
    app.add_option("--max-iters", spec.train.max_iters, "hard iteration cap")
        ->check(CLI::PositiveNumber);
    app.add_option("--restarts", spec.restarts, "random restarts per solve")
        ->check(CLI::PositiveNumber);
    app.add_option("--scenarios", spec.scenarios, "scenario count")->check(CLI::PositiveNumber);
    app.add_option("--baseline-samples", spec.baseline_samples,
                   "random phase draws for the MRT baseline")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", spec.seed, "experiment seed");
    app.add_option("--pathloss-mode", pathloss, "path loss handling")
        ->check(CLI::IsMember({"normalized", "absolute"}));
    app.add_option("--out", spec.out_path, "CSV output path (default: stdout)");
    app.add_option("--config", config_path, "JSON config file with the same keys");
    app.add_option("--restart-grid", spec.restart_grid, "restart counts for restart_sweep")
        ->delimiter(',');
    app.add_option("--n-grid", spec.n_grid, "N values for n_sweep")->delimiter(',');
    app.add_flag("--full-grid", spec.full_grid, "use the extended N grid (up to 144)");
    app.add_option("--scenario", spec.scenario_path, "replay a saved scenario JSON (single)");
    app.add_option("--export-scenario", spec.export_scenario_path,
                   "write the generated scenario JSON (single)");

    if (args.empty()) throw UsageError(app.help(), 2);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw UsageError(app.help(), 0);
    } catch (const CLI::ParseError& e) {
        throw UsageError(std::string(e.what()), 2);
    }

    spec.kind = kind_from(kind);
    spec.dims.bs_antennas = static_cast<std::size_t>(m);
    spec.dims.users = static_cast<std::size_t>(k);
    spec.dims.irs_elements = static_cast<std::size_t>(n);
    spec.train.optimizer =
        optimizer == "adam" ? optim::OptimizerKind::Adam : optim::OptimizerKind::Sgd;
    spec.pathloss_mode =
        pathloss == "normalized" ? PathlossMode::Normalized : PathlossMode::Absolute;

    validate_spec(spec);
    return spec;
}

int run_experiment(const ExperimentSpec& spec) {
    bool ok = true;
    switch (spec.kind) {
        case ExperimentKind::Convergence: {
            auto r = run_convergence(spec);
            emit(r.csv, spec);
            ok = r.all_finite;
            break;
        }
        case ExperimentKind::RestartSweep: {
            auto r = run_restart_sweep(spec);
            emit(r.csv, spec);
            ok = r.all_finite;
            break;
        }
        case ExperimentKind::NSweep: {
            auto r = run_n_sweep(spec);
            emit(r.csv, spec);
            ok = r.all_finite;
            break;
        }
        case ExperimentKind::Timing: {
            auto r = run_timing(spec);
            emit(r.csv, spec);
            ok = r.all_finite;
            break;
        }
        case ExperimentKind::Single: {
            auto r = run_single(spec);
            emit(r.csv, spec);
            ok = r.all_finite;
            break;
        }
    }
    return ok ? 0 : 1;
}

}  // namespace tapeopt::bench
