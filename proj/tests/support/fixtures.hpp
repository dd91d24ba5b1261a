#pragma once

// Shared datasets for the solver-level tests.

#include <cstdint>
#include <numeric>
#include <vector>

#include "fdid/sim.hpp"
#include "fdid/signals.hpp"

namespace fixture {

inline std::vector<double> int_times(std::size_t n, std::size_t start = 0) {
    std::vector<double> t(n);
    std::iota(t.begin(), t.end(), static_cast<double>(start));
    return t;
}

// Example-1 system driven by white Gaussian noise, sampled at t = 0..n-1.
inline fdid::Dataset example1_dataset(std::size_t n, double snr_db, std::uint64_t seed) {
    fdid::Dataset d;
    d.axis = fdid::Axis::Discrete;
    const auto u = fdid::white_gaussian_input(n, seed);
    d.input = u;
    d.sample_times = int_times(n);
    const auto y = fdid::simulate(fdid::example1_system(), u, d.sample_times).y;
    d.outputs = fdid::add_noise_snr(y, snr_db, seed + 1000003);
    return d;
}

// Example-3 system driven by a switching pulse, jittered sampling.
inline fdid::Dataset example3_dataset(std::size_t n, double ts, double snr_db, std::uint64_t seed) {
    fdid::Dataset d;
    d.axis = fdid::Axis::Continuous;
    d.sample_times = fdid::jittered_times(n, ts, seed);
    const auto u = fdid::random_switching_input(d.sample_times.back(), 0.1, 0.6, seed + 17);
    d.input = u;
    const auto y = fdid::simulate(fdid::example3_system(), u, d.sample_times).y;
    d.outputs = fdid::add_noise_snr(y, snr_db, seed + 1000003);
    return d;
}

}  // namespace fixture
