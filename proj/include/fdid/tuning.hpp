#pragma once

// Hold-out selection of the regularization weight and the kernel decay.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fdid/identify.hpp"

namespace fdid {

struct TuneConfig {
    // Explicit split. When both are empty the split comes from train_count
    // (first rows train) or, if that is 0, from train_fraction.
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::size_t train_count = 0;
    double train_fraction = 0.5;

    // Empty grids select the defaults below.
    std::vector<double> lambdas;
    std::vector<double> decays;  // alpha (discrete) or beta (continuous)

    // Extra seeded random points, log-uniform in lambda and uniform (alpha)
    // or log-uniform (beta) in decay over the grid's range.
    std::size_t random_points = 0;
    std::uint64_t seed = 0;
};

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};
// Throws Config when the split is not a partition of 0..n-1 or either side is empty.
Split make_split(const TuneConfig& cfg, std::size_t n);

// 8 points, 10^-4 .. 10^2.
std::vector<double> default_lambda_grid();
// 8 points: alpha linear in [0.5, 0.99], beta log-spaced in [0.1, 10].
std::vector<double> default_decay_grid(Axis axis);

struct Theta {
    double lambda = 1.0;
    double decay = 0.5;
};

// Mean squared validation residual (1/|V|) sum_{i in V} (y_i - L_{u,t_i}(g)).
double validation_error(const Model& m, const Dataset& d, const std::vector<std::size_t>& validation);

// Fits on the training rows with the kernel `base` at the decay of `theta`
// and returns the validation error. Errors from the fit are rethrown with
// theta in the message.
double validation_error(const Dataset& d, const Split& split, const KernelSpec& base, const Theta& theta,
                        const FrequencyPartition& p, double eps, const SolverConfig& cfg = {},
                        const IdentifyOptions& opts = {});

struct TuneRow {
    double lambda = 0.0;
    double decay = 0.0;
    double v = 0.0;  // NaN when the fit failed
    std::string error;
};

struct TuneResult {
    Theta best;
    double best_v = 0.0;
    std::vector<TuneRow> table;  // grid in (decay, lambda) order, then random points
};

// Exhaustive search; ties go to the larger lambda, then the larger decay.
// Throws NonConvergence carrying every message when all candidates fail.
TuneResult tune(const Dataset& d, const KernelSpec& base, const FrequencyPartition& p, double eps,
                const TuneConfig& cfg, const SolverConfig& solver = {}, const IdentifyOptions& opts = {});

// CSV with header `lambda,decay,v`.
void write_tune_table(const TuneResult& r, const std::filesystem::path& path);

}  // namespace fdid
