#pragma once

// Representers of the loss functionals L_{u,tau} and of the frequency
// functionals F_w^(r), F_w^(i) in the RKHS of the TC kernel, and their inner
// products. Continuous-axis entries use closed forms; discrete-axis entries
// use exact finite sums and geometric series.
//
// Conventions: F_w(g) = sum_t g_t e^{-jwt} (or the integral), so that
// F_w^(r)(g) = Re F_w(g) and F_w^(i)(g) = Im F_w(g). Every representer and
// every inner product scales linearly in the kernel scale gamma; the free
// functions below are stated for gamma = 1.

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <unordered_map>
#include <vector>

#include "fdid/kernels.hpp"
#include "fdid/signals.hpp"

namespace fdid {

using cplx = std::complex<double>;

struct BasisDescriptor {
    enum class Kind { Input, FreqReal, FreqImag };
    Kind kind = Kind::Input;
    double value = 0.0;  // tau for Input, omega otherwise

    static BasisDescriptor input(double tau) { return {Kind::Input, tau}; }
    static BasisDescriptor freq_real(double w) { return {Kind::FreqReal, w}; }
    static BasisDescriptor freq_imag(double w) { return {Kind::FreqImag, w}; }

    bool is_freq() const noexcept { return kind != Kind::Input; }
    friend bool operator==(const BasisDescriptor&, const BasisDescriptor&) = default;
};

const char* to_string(BasisDescriptor::Kind k) noexcept;

// int_a^b e^{-beta max(t,s)} ds, 0 <= a <= b.
double psi(double t, double a, double b, double beta);
// int_0^x int_0^y e^{-beta max(s,t)} dt ds.
double nu(double x, double y, double beta);

// phi_{w,t} = int_0^inf e^{-beta max(t,s)} e^{-jws} ds.
cplx phi_omega_ct(double omega, double t, double beta);
// phi_{w,t} = sum_{s>=0} alpha^max(t,s) e^{-jws}. `closed` selects the
// geometric closed form; otherwise the sum is truncated with tail <= tol.
cplx phi_omega_dt(double omega, long long t, double alpha, double tol = 1e-12, bool closed = true);

struct Zeta {
    cplx r;
    cplx i;
};
// zeta_r(w1,w2) = F_{w1}(phi^(r)_{w2}), zeta_i(w1,w2) = F_{w1}(phi^(i)_{w2}).
Zeta zeta(double omega1, double omega2, double beta);
Zeta zeta_dt(double omega1, double omega2, double alpha);
Zeta zeta_dt_truncated(double omega1, double omega2, double alpha, double tol);

// z_u(w,tau) = int_0^inf phi_{w,t} u_{tau-t} dt for a piecewise-constant u.
cplx zu_ct(const PiecewiseConstantInput& u, double omega, double tau, double beta);

// Caches per-sample-time data for one (dataset, kernel) pair. All Gram
// entries, transforms and pointwise values go through this class so that
// repeated evaluations of the same pair are bit-identical.
class GramContext {
public:
    enum class DiscreteSum { Closed, Truncated };

    GramContext(const Dataset& d, const KernelSpec& spec, double tol = 1e-12,
                DiscreteSum mode = DiscreteSum::Closed);

    const Dataset& dataset() const noexcept { return d_; }
    const KernelSpec& spec() const noexcept { return spec_; }
    double tol() const noexcept { return tol_; }
    DiscreteSum mode() const noexcept { return mode_; }

    // <phi_a, phi_b>_H; symmetric bit-for-bit.
    double inner(const BasisDescriptor& a, const BasisDescriptor& b) const;
    // F_w(phi_g) as a complex number.
    cplx transform(const BasisDescriptor& g, double omega) const;
    // phi_g(t).
    double value(const BasisDescriptor& g, double t) const;

    Eigen::MatrixXd gram(std::span<const BasisDescriptor> basis) const;
    // Rows: basis elements, columns: omegas; entry F_w(phi_g).
    Eigen::MatrixXcd transforms(std::span<const BasisDescriptor> basis, std::span<const double> omegas) const;
    // sum_i x_i F_w(phi_{g_i}) per omega. Discrete input elements are folded
    // into one weight sequence first, so each omega costs O(n) for them.
    Eigen::VectorXcd combined_transform(std::span<const BasisDescriptor> basis, const Eigen::VectorXd& x,
                                        std::span<const double> omegas) const;

private:
    struct TauData {
        // discrete: phi_{u,tau}(t) for t = 0..tau
        std::vector<double> phi_u;
        double input_sum = 0.0;
        // continuous: points a_i = max(tau - s_i, 0) > 0 with weights xi_{i+1} - xi_i
        std::vector<double> a, w, ea;
    };

    const TauData& tau_data(double tau) const;
    cplx input_transform(const TauData& td, double tau, double omega) const;
    cplx freq_transform(BasisDescriptor::Kind kind, double omega2, double omega1) const;
    Zeta freq_zeta(double omega2, double omega1) const;
    double input_inner(double tau1, double tau2) const;
    std::vector<cplx> phi_omega_table(double omega, long long n) const;

    Dataset d_;
    KernelSpec spec_;
    double tol_;
    DiscreteSum mode_;
    std::unordered_map<double, TauData> cache_;
};

// Free-function forms; each builds a temporary context.
double phi_u_value(const Dataset& d, const KernelSpec& spec, double tau, double t);
double inner_product(const Dataset& d, const KernelSpec& spec, const BasisDescriptor& a,
                     const BasisDescriptor& b, double tol = 1e-12);

}  // namespace fdid
