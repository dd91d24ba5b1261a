#pragma once

// Finite QCQP data: frequency range, partitions with the mesh guarantee,
// basis layout and the Gram matrix Phi with its objective and constraint
// vectors.

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "fdid/functionals.hpp"
#include "fdid/kernels.hpp"
#include "fdid/signals.hpp"

namespace fdid {

struct FrequencyPartition {
    std::vector<double> omegas;  // 0 = w_0 < ... < w_nP = w_max
    double mesh = 0.0;

    std::size_t n_intervals() const noexcept { return omegas.empty() ? 0 : omegas.size() - 1; }
    double omega_max() const noexcept { return omegas.empty() ? 0.0 : omegas.back(); }
};

// Smallest w_max with gamma * 2/(w^2 + beta^2) <= lambda / sum(y^2) beyond it.
double omega_max_ct(const KernelSpec& spec, const std::vector<double>& y, double lambda);
// pi on the discrete axis, omega_max_ct otherwise.
double omega_max(const KernelSpec& spec, const std::vector<double>& y, double lambda);

enum class MomentSource { Exact, Conservative };

// 2 eps lambda / (4 mu_0 mu_1 sum(y^2)); +inf when y == 0. Conservative uses
// mu_bound in place of the exact moments.
double mesh_bound(const KernelSpec& spec, const std::vector<double>& y, double lambda, double eps,
                  MomentSource src = MomentSource::Exact);

// Lipschitz constant 4 mu_0 mu_1 of w -> |F_w(g)|^2 per unit ||g||_H^2.
double lipschitz_factor(const KernelSpec& spec, MomentSource src = MomentSource::Exact);

// Uniform partition of [0, w_max] with ceil(w_max / mesh_target) intervals.
FrequencyPartition build_partition(double omega_max, double mesh_target);
// w_i = w_max * i / n for i = 0..n.
FrequencyPartition uniform_partition(double omega_max, std::size_t n);
// Sorted, de-duplicated partition from arbitrary frequencies (must include 0).
FrequencyPartition partition_from(std::vector<double> omegas);

struct AssembleOptions {
    std::size_t max_dim = 6000;
    double jitter = 1e-10;
    // Cap on cached complex transforms (samples x partition frequencies).
    std::size_t max_cache_entries = 50'000'000;
};

// min ||A x - y||^2 + lambda x' Phi x  s.t. (b_j' x)^2 + (c_j' x)^2 <= 1 - eps.
// In an assembled problem A is the first n_d rows of Phi and b_j, c_j are
// columns n_d + 2j and n_d + 2j + 1.
struct GramProblem {
    Eigen::MatrixXd phi;
    Eigen::MatrixXd A;  // n_a x m
    Eigen::MatrixXd B;  // m x n_c
    Eigen::MatrixXd C;  // m x n_c
    Eigen::VectorXd y;
    double lambda = 1.0;
    double eps = 0.0;
    double jitter = 1e-10;
    std::vector<BasisDescriptor> descriptors;
    std::vector<double> omegas;  // constraint frequencies
    std::size_t n_d = 0;
    bool aliased = false;

    std::size_t dim() const noexcept { return static_cast<std::size_t>(phi.rows()); }
    std::size_t n_constraints() const noexcept { return static_cast<std::size_t>(B.cols()); }
    void validate() const;
};

// Problem with A, b_j, c_j read from Phi using the standard layout.
GramProblem make_gram_problem(Eigen::MatrixXd phi, std::vector<BasisDescriptor> descriptors, std::size_t n_d,
                              Eigen::VectorXd y, double lambda, double eps, double jitter = 1e-10);
// Problem with explicit objective rows and constraint vectors.
GramProblem make_general_problem(Eigen::MatrixXd phi, Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C,
                                 Eigen::VectorXd y, double lambda, double eps, double jitter = 1e-10);

// Input functionals for every sample time followed by (F^r, F^i) pairs.
std::vector<BasisDescriptor> layout(const Dataset& d, std::span<const double> omegas);

GramProblem assemble(const GramContext& ctx, std::span<const double> omegas, double lambda, double eps,
                     const AssembleOptions& opts = {});
GramProblem assemble(const Dataset& d, const KernelSpec& spec, const FrequencyPartition& p, double lambda,
                     double eps, double tol = 1e-12, const AssembleOptions& opts = {});

// Debug dump: "FDIDPHI1", uint64 m (little endian), then m*m row-major doubles.
void write_phi(const Eigen::MatrixXd& phi, const std::filesystem::path& path);
Eigen::MatrixXd read_phi(const std::filesystem::path& path);

}  // namespace fdid
