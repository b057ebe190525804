#include "tapeopt/scenario_io.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace tapeopt::channels {

namespace {

using nlohmann::json;

json matrix_to_json(const Tensor& t) {
    json rows = json::array();
    for (std::size_t r = 0; r < t.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < t.cols(); ++c) {
            const cdouble z = t.at(r, c);
            row.push_back(json::array({z.real(), z.imag()}));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Tensor matrix_from_json(const json& j, std::size_t rows, std::size_t cols, const char* name) {
    if (!j.is_array() || j.size() != rows)
        throw std::runtime_error(std::string("scenario: bad row count for ") + name);
    Tensor t = Tensor::zeros({rows, cols}, DType::Complex);
    for (std::size_t r = 0; r < rows; ++r) {
        const json& row = j[r];
        if (!row.is_array() || row.size() != cols)
            throw std::runtime_error(std::string("scenario: bad column count for ") + name);
        for (std::size_t c = 0; c < cols; ++c) {
            const json& z = row[c];
            if (!z.is_array() || z.size() != 2)
                throw std::runtime_error(std::string("scenario: entries of ") + name +
                                         " must be [re, im] pairs");
            t.at(r, c) = cdouble{z[0].get<double>(), z[1].get<double>()};
        }
    }
    return t;
}

}  // namespace

void save_scenario(std::ostream& out, const ChannelSet& cs, std::uint64_t seed) {
    json j;
    j["dims"] = {{"m", cs.dims.bs_antennas}, {"k", cs.dims.users}, {"n", cs.dims.irs_elements}};
    j["seed"] = seed;
    j["sigma2"] = cs.sigma2;
    j["p_max"] = cs.p_max;
    j["G"] = matrix_to_json(cs.G);
    j["Hr"] = matrix_to_json(cs.Hr);
    out << j.dump(2) << "\n";
}

void save_scenario_file(const std::string& path, const ChannelSet& cs, std::uint64_t seed) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_scenario: cannot open " + path);
    save_scenario(out, cs, seed);
}

LoadedScenario load_scenario(std::istream& in) {
    json j = json::parse(in);
    LoadedScenario s;
    s.channels.dims.bs_antennas = j.at("dims").at("m").get<std::size_t>();
    s.channels.dims.users = j.at("dims").at("k").get<std::size_t>();
    s.channels.dims.irs_elements = j.at("dims").at("n").get<std::size_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.channels.sigma2 = j.at("sigma2").get<double>();
    s.channels.p_max = j.at("p_max").get<double>();
    if (s.channels.sigma2 <= 0.0 || s.channels.p_max <= 0.0)
        throw std::runtime_error("scenario: sigma2 and p_max must be positive");
    s.channels.G = matrix_from_json(j.at("G"), s.channels.dims.irs_elements,
                                    s.channels.dims.bs_antennas, "G");
    s.channels.Hr = matrix_from_json(j.at("Hr"), s.channels.dims.users,
                                     s.channels.dims.irs_elements, "Hr");
    return s;
}

LoadedScenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_scenario: cannot open " + path);
    return load_scenario(in);
}

}  // namespace tapeopt::channels
