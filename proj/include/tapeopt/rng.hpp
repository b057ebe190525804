#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "tapeopt/tensor.hpp"

namespace tapeopt {

// Deterministic random source. mt19937_64 has a fully specified bit stream,
// and the distributions below are hand-rolled, so identical seeds give
// identical draws on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // CN(0,1): real and imaginary parts are independent N(0, 1/2).
    cdouble cnormal() {
        return cdouble{normal(), normal()} * std::numbers::sqrt2 * 0.5;
    }

    Tensor normal_tensor(std::vector<std::size_t> shape) {
        Tensor t = Tensor::zeros(std::move(shape), DType::Real);
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = cdouble{normal(), 0.0};
        return t;
    }

    Tensor uniform_tensor(std::vector<std::size_t> shape, double lo, double hi) {
        Tensor t = Tensor::zeros(std::move(shape), DType::Real);
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = cdouble{uniform(lo, hi), 0.0};
        return t;
    }

    // Decorrelated child seed for stream `index` of a run seeded by `seed`
    // (SplitMix64 finalizer).
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace tapeopt
