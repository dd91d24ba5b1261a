#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include "fdid/kernels.hpp"

namespace fdid {

// u(t) = values[i] on [breakpoints[i], breakpoints[i+1]); zero before 0 and
// from breakpoints.back() on. breakpoints.size() == values.size() + 1.
struct PiecewiseConstantInput {
    std::vector<double> breakpoints;
    std::vector<double> values;

    std::size_t segments() const noexcept { return values.size(); }
    double end() const noexcept { return breakpoints.back(); }
    double at(double t) const;
    void validate() const;
};

// u_t = samples[t] for 0 <= t < n, zero elsewhere.
struct DiscreteInput {
    std::vector<double> samples;

    double at(long long t) const noexcept {
        return (t < 0 || t >= static_cast<long long>(samples.size())) ? 0.0
                                                                       : samples[static_cast<std::size_t>(t)];
    }
    void validate() const;
};

using Input = std::variant<DiscreteInput, PiecewiseConstantInput>;

struct Dataset {
    Axis axis = Axis::Discrete;
    Input input;
    std::vector<double> sample_times;
    std::vector<double> outputs;

    std::size_t size() const noexcept { return sample_times.size(); }
    const DiscreteInput& discrete_input() const { return std::get<DiscreteInput>(input); }
    const PiecewiseConstantInput& pwc_input() const { return std::get<PiecewiseConstantInput>(input); }
    // Input value at time t (sample value or piecewise-constant level).
    double input_at(double t) const;
    // Restrict to the listed sample indices, keeping the full input signal.
    Dataset subset(const std::vector<std::size_t>& rows) const;
    void validate() const;
};

Dataset scale_outputs(const Dataset& d, double rho);
double sum_squares(const std::vector<double>& v) noexcept;

// Dataset CSV: header `t,u,y`. On the discrete axis each row gives u at an
// integer time; rows must cover 0, 1, 2, ... and a row with an empty y cell
// contributes input only. On the continuous axis the input comes from a
// separate `s,xi` file and the u column is informational.
Dataset load_dataset(const std::filesystem::path& path, Axis axis,
                     const std::optional<std::filesystem::path>& input_path = std::nullopt);
void save_dataset(const Dataset& d, const std::filesystem::path& path,
                  const std::optional<std::filesystem::path>& input_path = std::nullopt);

// Continuous input file: header `s,xi`; row i holds breakpoint s_i and the
// level held from s_i on. The last row marks the end of the support and must
// carry xi = 0.
PiecewiseConstantInput load_pwc_input(const std::filesystem::path& path);
void save_pwc_input(const PiecewiseConstantInput& u, const std::filesystem::path& path);

}  // namespace fdid
