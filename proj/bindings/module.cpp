#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>

#include "tapeopt/beamforming.hpp"
#include "tapeopt/bench.hpp"
#include "tapeopt/channels.hpp"
#include "tapeopt/scenario_io.hpp"
#include "tapeopt/transforms.hpp"

namespace py = pybind11;
using namespace tapeopt;

namespace {

Tensor tensor_from_array(const py::array& arr, const char* name) {
    std::vector<std::size_t> shape(arr.ndim());
    for (py::ssize_t d = 0; d < arr.ndim(); ++d) shape[d] = static_cast<std::size_t>(arr.shape(d));

    if (arr.dtype().kind() == 'c') {
        auto a = arr.cast<py::array_t<std::complex<double>, py::array::c_style |
                                                                py::array::forcecast>>();
        std::vector<cdouble> data(a.data(), a.data() + a.size());
        return Tensor::from_complex(std::move(shape), std::move(data));
    }
    if (arr.dtype().kind() != 'f' && arr.dtype().kind() != 'i' && arr.dtype().kind() != 'u')
        throw std::invalid_argument(std::string(name) + ": expected a real or complex array");
    auto a = arr.cast<py::array_t<double, py::array::c_style | py::array::forcecast>>();
    std::vector<double> data(a.data(), a.data() + a.size());
    return Tensor::from_real(std::move(shape), std::move(data));
}

py::array array_from_tensor(const Tensor& t) {
    std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
    if (t.is_complex()) {
        py::array_t<std::complex<double>> out(shape);
        std::copy(t.values().begin(), t.values().end(), out.mutable_data());
        return out;
    }
    py::array_t<double> out(shape);
    double* d = out.mutable_data();
    for (std::size_t i = 0; i < t.size(); ++i) d[i] = t[i].real();
    return out;
}

channels::PathlossMode pathloss_from(const std::string& mode) {
    if (mode == "normalized") return channels::PathlossMode::Normalized;
    if (mode == "absolute") return channels::PathlossMode::Absolute;
    throw std::invalid_argument("pathloss_mode must be 'normalized' or 'absolute'");
}

optim::TrainConfig train_config(const std::string& optimizer, double lr, int patience,
                                int max_iters) {
    optim::TrainConfig cfg;
    if (optimizer == "adam")
        cfg.optimizer = optim::OptimizerKind::Adam;
    else if (optimizer == "sgd")
        cfg.optimizer = optim::OptimizerKind::Sgd;
    else
        throw std::invalid_argument("optimizer must be 'adam' or 'sgd'");
    cfg.lr = lr;
    cfg.patience = patience;
    cfg.max_iters = max_iters;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Constrained optimization by gradient training, with an IRS-aided "
              "multi-user MIMO joint-beamforming solver";

    py::class_<ChannelSet>(m, "ChannelSet")
        .def(py::init([](py::array G, py::array Hr, double sigma2, double p_max) {
                 ChannelSet cs;
                 cs.G = tensor_from_array(G, "G");
                 cs.Hr = tensor_from_array(Hr, "Hr");
                 if (cs.G.rank() != 2 || cs.Hr.rank() != 2)
                     throw std::invalid_argument("G and Hr must be matrices");
                 cs.dims = {cs.G.cols(), cs.Hr.rows(), cs.G.rows()};
                 cs.sigma2 = sigma2;
                 cs.p_max = p_max;
                 return cs;
             }),
             py::arg("G"), py::arg("Hr"), py::arg("sigma2"), py::arg("p_max"))
        .def_property_readonly("G", [](const ChannelSet& cs) { return array_from_tensor(cs.G); })
        .def_property_readonly("Hr", [](const ChannelSet& cs) { return array_from_tensor(cs.Hr); })
        .def_readonly("sigma2", &ChannelSet::sigma2)
        .def_readonly("p_max", &ChannelSet::p_max)
        .def_property_readonly("m", [](const ChannelSet& cs) { return cs.dims.bs_antennas; })
        .def_property_readonly("k", [](const ChannelSet& cs) { return cs.dims.users; })
        .def_property_readonly("n", [](const ChannelSet& cs) { return cs.dims.irs_elements; });

    py::class_<beamforming::Solution>(m, "Solution")
        .def_property_readonly("theta",
                               [](const beamforming::Solution& s) {
                                   return array_from_tensor(s.theta);
                               })
        .def_property_readonly("W",
                               [](const beamforming::Solution& s) {
                                   return array_from_tensor(s.W);
                               })
        .def_readonly("sum_rate", &beamforming::Solution::sum_rate)
        .def_property_readonly("losses",
                               [](const beamforming::Solution& s) { return s.trace.losses; })
        .def_property_readonly("iterations",
                               [](const beamforming::Solution& s) {
                                   return s.trace.iterations_run;
                               })
        .def_property_readonly("stop_reason", [](const beamforming::Solution& s) {
            return s.trace.stop_reason;
        });

    m.def(
        "gen_channels",
        [](std::size_t m_, std::size_t k, std::size_t n, std::uint64_t seed, double rician_eps,
           double snr_db, const std::string& pathloss_mode) {
            channels::ScenarioConfig cfg;
            cfg.dims = {m_, k, n};
            cfg.seed = seed;
            cfg.rician_eps = rician_eps;
            cfg.tx_snr_db = snr_db;
            cfg.pathloss_mode = pathloss_from(pathloss_mode);
            return channels::gen_channels(cfg);
        },
        py::arg("m"), py::arg("k"), py::arg("n"), py::arg("seed") = 1,
        py::arg("rician_eps") = 10.0, py::arg("snr_db") = 20.0,
        py::arg("pathloss_mode") = "normalized");

    m.def("path_loss_db", &channels::path_loss_db, py::arg("distance_m"));
    m.def(
        "steering",
        [](std::size_t n, double angle) { return array_from_tensor(channels::steering(n, angle)); },
        py::arg("n"), py::arg("angle"));

    m.def(
        "save_scenario",
        [](const std::string& path, const ChannelSet& cs, std::uint64_t seed) {
            channels::save_scenario_file(path, cs, seed);
        },
        py::arg("path"), py::arg("channels"), py::arg("seed") = 0);
    m.def(
        "load_scenario",
        [](const std::string& path) {
            auto loaded = channels::load_scenario_file(path);
            return py::make_tuple(loaded.channels, loaded.seed);
        },
        py::arg("path"));

    m.def(
        "effective_channel",
        [](py::array G, py::array Hr, py::array theta) {
            return array_from_tensor(beamforming::effective_channel(
                tensor_from_array(G, "G"), tensor_from_array(Hr, "Hr"),
                tensor_from_array(theta, "theta")));
        },
        py::arg("G"), py::arg("Hr"), py::arg("theta"));
    m.def(
        "sinr",
        [](py::array H, py::array W, double sigma2, std::size_t k) {
            return beamforming::sinr(tensor_from_array(H, "H"), tensor_from_array(W, "W"),
                                     sigma2, k);
        },
        py::arg("H"), py::arg("W"), py::arg("sigma2"), py::arg("k"));
    m.def(
        "sum_rate",
        [](py::array H, py::array W, double sigma2) {
            return beamforming::sum_rate(tensor_from_array(H, "H"), tensor_from_array(W, "W"),
                                         sigma2);
        },
        py::arg("H"), py::arg("W"), py::arg("sigma2"));

    m.def(
        "solve",
        [](const ChannelSet& cs, const std::string& optimizer, double lr, int patience,
           int max_iters, int restarts, std::uint64_t seed) {
            beamforming::SolveConfig cfg;
            cfg.train = train_config(optimizer, lr, patience, max_iters);
            cfg.restarts = restarts;
            cfg.seed = seed;
            return beamforming::solve(cs, cfg);
        },
        py::arg("channels"), py::arg("optimizer") = "adam", py::arg("lr") = 0.1,
        py::arg("patience") = 25, py::arg("max_iters") = 5000, py::arg("restarts") = 1,
        py::arg("seed") = 1);

    m.def("oracle_k1_m1", &beamforming::oracle_k1_m1, py::arg("channels"));
    m.def("oracle_grid", &beamforming::oracle_grid, py::arg("channels"),
          py::arg("phase_grid_size") = 256);
    m.def("baseline_random_mrt", &bench::baseline_random_mrt, py::arg("channels"),
          py::arg("samples") = 8, py::arg("seed") = 1);

    // Constraint reparameterizations applied numerically (recover path).
    m.def(
        "unit_modulus",
        [](py::array phi) {
            const auto spec =
                transforms::TransformSpec::unit_modulus(tensor_from_array(phi, "phi").size());
            return array_from_tensor(spec.recover({{tensor_from_array(phi, "phi")}}));
        },
        py::arg("phi"));
    m.def(
        "box",
        [](py::array xp, double a, double b) {
            const Tensor t = tensor_from_array(xp, "xp");
            const auto spec = transforms::TransformSpec::box(t.shape(), a, b);
            return array_from_tensor(spec.recover({{t}}));
        },
        py::arg("xp"), py::arg("a"), py::arg("b"));
    m.def(
        "sum_power",
        [](py::array u, double c, double budget) {
            const Tensor t = tensor_from_array(u, "u");
            const auto spec = transforms::TransformSpec::sum_power(t.size(), budget);
            return array_from_tensor(spec.recover({{t, Tensor::scalar(c)}}));
        },
        py::arg("u"), py::arg("c"), py::arg("budget"));
    m.def(
        "frobenius_power",
        [](py::array wr, py::array wi, double p_max) {
            const Tensor r = tensor_from_array(wr, "wr");
            const Tensor i = tensor_from_array(wi, "wi");
            if (r.rank() != 2) throw std::invalid_argument("wr must be a matrix");
            const auto spec =
                transforms::TransformSpec::frobenius_power(r.rows(), r.cols(), p_max);
            return array_from_tensor(spec.recover({{r, i}}));
        },
        py::arg("wr"), py::arg("wi"), py::arg("p_max"));
    m.def(
        "lin_eq_factorize",
        [](py::array A, py::array b) {
            const auto fac = transforms::lin_eq_factorize(tensor_from_array(A, "A"),
                                                          tensor_from_array(b, "b"));
            return py::make_tuple(array_from_tensor(fac.F), array_from_tensor(fac.x0));
        },
        py::arg("A"), py::arg("b"));
}
