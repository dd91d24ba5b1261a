#pragma once

// Tuned/correlated (TC) stable kernel k(s,t) = gamma * alpha^max(s,t) on the
// integers, or gamma * exp(-beta * max(s,t)) on the half line, alpha = e^-beta.

#include <cstdint>

namespace fdid {

enum class Axis { Discrete, Continuous };

const char* to_string(Axis a) noexcept;

struct KernelSpec {
    Axis axis = Axis::Discrete;
    // Continuous decay rate beta > 0. For the discrete axis this is -ln(alpha)
    // and is infinite when alpha == 0.
    double beta = 1.0;
    // Discrete decay alpha in [0, 1). For the continuous axis this is e^-beta.
    double alpha = 0.36787944117144233;
    double gamma = 1.0;

    static KernelSpec discrete(double alpha, double gamma = 1.0);
    static KernelSpec continuous(double beta, double gamma = 1.0);

    // The decay value tuned and reported: alpha (discrete) or beta (continuous).
    double decay() const noexcept { return axis == Axis::Discrete ? alpha : beta; }
    KernelSpec with_decay(double decay) const;

    // Throws InvalidKernel when the invariants do not hold.
    void validate() const;
};

enum class MomentMethod { Analytic, TruncatedSum };

struct KernelMoments {
    double mu0 = 0.0;
    double mu1 = 0.0;
    MomentMethod method = MomentMethod::Analytic;
};

double kernel_eval(const KernelSpec& spec, double s, double t);

// mu_n = sum_t t^n k(t,t)^(1/2) (discrete) or the matching integral.
// Analytic closed forms; `tol` is only used by the truncated variant.
double kernel_moments(const KernelSpec& spec, int n, double tol = 1e-12);
double kernel_moments_truncated(const KernelSpec& spec, int n, double tol);
KernelMoments kernel_moment_pair(const KernelSpec& spec);

// Upper bound on mu_n. On the continuous axis this is gamma^(1/2) (2/beta)^(n+1) n!,
// which equals mu_n for the TC kernel. On the discrete axis the integral bound
// is not enough for a sum, so the peak of t^n alpha^(t/2) is added.
double mu_bound(const KernelSpec& spec, int n);

}  // namespace fdid
