#pragma once

// Constraint-activation identification and model evaluation.

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdid/functionals.hpp"
#include "fdid/problem.hpp"
#include "fdid/qcqp.hpp"
#include "fdid/sim.hpp"

namespace fdid {

struct IterationRecord {
    std::size_t active = 0;  // constraints in the solved problem
    std::size_t added = 0;   // violated frequencies found after the solve
    double objective = 0.0;
    double max_violation = 0.0;  // max |F_w(g)|^2 - (1 - eps) over the partition
};

// g = sum_i x_i phi_i for the outputs scaled by 1/rho. Evaluations multiply
// by `gain` (rho, times any back-map gain) and add `feedthrough` as a
// Kronecker (discrete) or Dirac (continuous) term. A discrete `post_filter`
// then filters that response, and a `reference` system is added last:
// G = post_filter * (gain * G_g + feedthrough) + reference.
struct Model {
    KernelSpec spec;
    std::shared_ptr<const GramContext> ctx;
    std::vector<BasisDescriptor> descriptors;
    Eigen::VectorXd x;
    double lambda = 1.0;
    double eps = 0.0;
    double rho = 1.0;
    double gain = 1.0;
    double feedthrough = 0.0;
    bool constrained = true;
    std::optional<RationalTF> post_filter;
    std::optional<RationalTF> reference;

    std::vector<double> active;  // active constraint frequencies, ascending
    SolveReport report;
    std::vector<IterationRecord> trace;
    double mesh = 0.0;
    double mesh_bound = std::numeric_limits<double>::infinity();
    double omega_max = 0.0;
    bool certified = false;
    std::vector<std::string> warnings;

    Axis axis() const noexcept { return spec.axis; }
    std::size_t iterations() const noexcept { return trace.size(); }
    double rkhs_norm_sq() const noexcept { return report.rkhs_norm_sq; }
};

struct IdentifyOptions {
    double rho = 1.0;
    double tol = 1e-12;
    AssembleOptions assemble;
    GramContext::DiscreteSum discrete_sum = GramContext::DiscreteSum::Closed;
};

// Caches the input-functional Gram block and the transforms of the input
// functionals over the partition for one (dataset, kernel) pair, so that
// several (lambda, eps) solves share them.
class Identifier {
public:
    // `rows` selects the training samples (all when empty).
    Identifier(std::shared_ptr<const GramContext> ctx, FrequencyPartition p, std::vector<std::size_t> rows = {},
               double rho = 1.0, AssembleOptions opts = {});

    // Constraint activation from the empty set until no partition frequency
    // violates |F_w(g)|^2 <= 1 - eps.
    Model solve(double lambda, double eps, const SolverConfig& cfg = {}) const;
    // One solve with every partition frequency constrained.
    Model solve_full(double lambda, double eps, const SolverConfig& cfg = {}) const;
    // Kernel ridge regression without frequency constraints.
    Model solve_unconstrained(double lambda) const;

    const FrequencyPartition& partition() const noexcept { return p_; }
    const std::vector<double>& outputs() const noexcept { return y_; }

private:
    Model solve_on(const std::vector<std::size_t>& active, double lambda, double eps, const SolverConfig& cfg) const;
    Model base_model(double lambda, double eps) const;
    void certify(Model& m) const;

    std::shared_ptr<const GramContext> ctx_;
    FrequencyPartition p_;
    std::vector<BasisDescriptor> inputs_;
    std::vector<double> y_;  // scaled by 1/rho
    double rho_;
    AssembleOptions opts_;
    Eigen::MatrixXd phi_uu_;
    Eigen::MatrixXcd t_u_;  // F_w(phi_{u,t_i}), rows i, columns partition frequencies
};

Model identify(const Dataset& d, const KernelSpec& spec, const FrequencyPartition& p, double lambda, double eps,
               const SolverConfig& cfg = {}, const IdentifyOptions& opts = {});
Model identify_unconstrained(const Dataset& d, const KernelSpec& spec, double lambda, const IdentifyOptions& opts = {});

// sum_i x_i F_w(phi_i): the quantity the constraints bound by sqrt(1 - eps).
cplx constraint_response(const Model& m, double omega);
Eigen::VectorXcd constraint_response(const Model& m, std::span<const double> omegas);
// gain * constraint_response + feedthrough.
cplx frequency_response(const Model& m, double omega);
Eigen::VectorXcd frequency_response(const Model& m, std::span<const double> omegas);
// Same, from a precomputed constraint_response on `omegas`.
Eigen::VectorXcd frequency_response(const Model& m, std::span<const double> omegas, const Eigen::VectorXcd& constraint);

// gain * sum_i x_i phi_i(t), plus the feedthrough at t = 0 on the discrete
// axis, then the post-filter and reference. A post-filter needs integer t.
double impulse_response(const Model& m, double t);
std::vector<double> impulse_response(const Model& m, std::span<const double> ts);

// Predicted noise-free output L_{u,tau}(g) at a sample time of the model's
// context, with the reference system driven by the same input. Not defined
// for a post-filtered model.
double predict(const Model& m, double tau);

struct HinfCheck {
    double grid_sup = 0.0;    // max |constraint_response| over the grid
    double argmax = 0.0;
    double lipschitz = 0.0;   // 4 mu_0 mu_1 ||g||_H^2
    double mesh = 0.0;
    double certified_sup = 0.0;  // sqrt(max |F|^2 + lipschitz * mesh / 2)
    std::vector<double> magnitudes;  // |constraint_response| at each grid point
};
HinfCheck hinf_grid_sup(const Model& m, const FrequencyPartition& grid);
// Same, from a precomputed constraint_response on the grid.
HinfCheck hinf_grid_sup(const Model& m, const FrequencyPartition& grid, const Eigen::VectorXcd& F);

// 100 (1 - ||g_hat - g|| / ||g||).
double fit(std::span<const double> g_hat, std::span<const double> g_true);

}  // namespace fdid
