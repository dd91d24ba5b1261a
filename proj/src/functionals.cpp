#include "fdid/functionals.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "fdid/error.hpp"

namespace fdid {

namespace {

constexpr cplx J{0.0, 1.0};

cplx expj(double x) { return {std::cos(x), std::sin(x)}; }

// Breakpoint images a_i = max(tau - s_i, 0) with by-parts weights
// w_i = xi_{i+1} - xi_i (xi_0 = xi_{n_s+1} = 0); points with a_i = 0 drop out.
void ct_points(const PiecewiseConstantInput& u, double tau, double beta, std::vector<double>& a,
               std::vector<double>& w, std::vector<double>& ea) {
    const std::size_t ns = u.values.size();
    for (std::size_t i = 0; i <= ns; ++i) {
        const double ai = std::max(tau - u.breakpoints[i], 0.0);
        if (ai == 0.0) break;  // breakpoints increase, so the rest are zero too
        const double next = i < ns ? u.values[i] : 0.0;
        const double prev = i > 0 ? u.values[i - 1] : 0.0;
        const double wi = next - prev;
        if (wi == 0.0) continue;
        a.push_back(ai);
        w.push_back(wi);
        ea.push_back(std::exp(-beta * ai));
    }
}

// int_0^a phi_{w,t} dt, with e^{-beta a} supplied.
cplx Psi(double omega, double a, double ea, double beta) {
    if (omega == 0.0) {
        return (2.0 - (beta * a + 2.0) * ea) / (beta * beta);
    }
    const cplx jw = J * omega;
    const cplx first = (1.0 - ea) / (jw * beta);
    const cplx second = beta * (1.0 - ea * expj(-omega * a)) /
                        ((omega * omega - jw * beta) * (beta + jw));
    return first + second;
}

cplx zu_points(const std::vector<double>& a, const std::vector<double>& w, const std::vector<double>& ea,
               double omega, double beta) {
    cplx z = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) z += w[i] * Psi(omega, a[i], ea[i], beta);
    return z;
}

// C(a,b) = sum_{t,s>=0} alpha^max(t,s) e^{j a t} e^{j b s}
cplx c_sum(double a, double b, double alpha) {
    const cplx ea = alpha * expj(a);
    const cplx eb = alpha * expj(b);
    const cplx diag = 1.0 / (1.0 - alpha * expj(a + b));
    return diag * (1.0 + ea / (1.0 - ea) + eb / (1.0 - eb));
}

int kind_rank(BasisDescriptor::Kind k) { return static_cast<int>(k); }

bool desc_less(const BasisDescriptor& a, const BasisDescriptor& b) {
    if (a.kind != b.kind) return kind_rank(a.kind) < kind_rank(b.kind);
    return a.value < b.value;
}

}  // namespace

const char* to_string(BasisDescriptor::Kind k) noexcept {
    switch (k) {
        case BasisDescriptor::Kind::Input: return "input";
        case BasisDescriptor::Kind::FreqReal: return "freq_real";
        case BasisDescriptor::Kind::FreqImag: return "freq_imag";
    }
    return "unknown";
}

// ===========================================================================
// Scalar closed forms
// ===========================================================================

double psi(double t, double a, double b, double beta) {
    if (a > b) throw Error(ErrorKind::Domain, "psi: need a <= b");
    if (a < 0.0 || t < 0.0) throw Error(ErrorKind::Domain, "psi: negative argument");
    const double m = std::max(std::min(t, b), a);
    return (std::exp(-beta * m) - std::exp(-beta * b)) / beta + (m - a) * std::exp(-beta * t);
}

double nu(double x, double y, double beta) {
    if (x < 0.0 || y < 0.0) throw Error(ErrorKind::Domain, "nu: negative argument");
    const double m = std::min(x, y);
    return (2.0 - 2.0 * std::exp(-beta * m) - beta * m * (std::exp(-beta * x) + std::exp(-beta * y))) /
           (beta * beta);
}

cplx phi_omega_ct(double omega, double t, double beta) {
    const double e = std::exp(-beta * t);
    if (omega == 0.0) return e * (t + 1.0 / beta);
    const double x = omega * t;
    const double h = std::sin(0.5 * x);
    // (1 - e^{-jx}) / (jw) = sin(x)/w - j 2 sin^2(x/2)/w
    const cplx ramp{std::sin(x) / omega, -2.0 * h * h / omega};
    return e * (ramp + expj(-x) / (beta + J * omega));
}

cplx phi_omega_dt(double omega, long long t, double alpha, double tol, bool closed) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidKernel, "phi_omega_dt: need 0 <= alpha < 1");
    if (t < 0) throw Error(ErrorKind::Domain, "phi_omega_dt: negative time");
    const double td = static_cast<double>(t);
    if (closed) {
        const double at = std::pow(alpha, td);
        cplx head;
        if (omega == 0.0) {
            head = td;
        } else {
            // sum_{s<t} e^{-jws} as a Dirichlet kernel
            head = expj(-0.5 * omega * (td - 1.0)) * (std::sin(0.5 * omega * td) / std::sin(0.5 * omega));
        }
        const cplx r = alpha * expj(-omega);
        return at * head + at * expj(-omega * td) / (1.0 - r);
    }
    // Truncate once the tail sum_{s>T} alpha^s = alpha^{T+1}/(1-alpha) is below tol.
    long long T = t;
    while (std::pow(alpha, static_cast<double>(T + 1)) / (1.0 - alpha) > tol) ++T;
    cplx sum = 0.0;
    for (long long s = T; s >= 0; --s) {
        sum += std::pow(alpha, static_cast<double>(std::max(t, s))) * expj(-omega * static_cast<double>(s));
    }
    return sum;
}

Zeta zeta(double omega1, double omega2, double beta) {
    const cplx d1 = beta + J * omega1;
    if (omega2 == 0.0) {
        return {(2.0 * beta + J * omega1) / (beta * d1 * d1), 0.0};
    }
    const double w2 = omega2;
    const cplx z1 = 1.0 / ((w2 * w2 - J * w2 * beta) * (beta + J * omega1 + J * w2));
    const cplx z2 = 1.0 / ((w2 * w2 + J * w2 * beta) * (beta + J * omega1 - J * w2));
    const cplx zr = 0.5 * beta * (z1 + z2);
    const cplx zi = beta / (2.0 * J) * (z1 - z2) - (1.0 / w2) / d1;
    return {zr, zi};
}

Zeta zeta_dt(double omega1, double omega2, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidKernel, "zeta_dt: need 0 <= alpha < 1");
    if (omega2 == 0.0) return {c_sum(-omega1, 0.0, alpha), 0.0};
    const cplx cp = c_sum(-omega1, omega2, alpha);
    const cplx cm = c_sum(-omega1, -omega2, alpha);
    return {0.5 * (cp + cm), (cm - cp) / (2.0 * J)};
}

Zeta zeta_dt_truncated(double omega1, double omega2, double alpha, double tol) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidKernel, "zeta_dt: need 0 <= alpha < 1");
    // |phi_{w,t}| <= (t + 1/(1-alpha)) alpha^t; stop once the remaining tail is below tol.
    auto tail = [alpha](long long T) {
        const double q = alpha;
        const double qT = std::pow(q, static_cast<double>(T + 1));
        const double td = static_cast<double>(T + 1);
        return qT * (td * (1.0 - q) + q) / ((1.0 - q) * (1.0 - q)) + qT / ((1.0 - q) * (1.0 - q));
    };
    long long T = 0;
    while (tail(T) > tol) ++T;
    Zeta z{0.0, 0.0};
    for (long long t = T; t >= 0; --t) {
        const cplx p = phi_omega_dt(omega2, t, alpha);
        const cplx e = expj(-omega1 * static_cast<double>(t));
        z.r += p.real() * e;
        z.i += (omega2 == 0.0 ? 0.0 : p.imag()) * e;
    }
    return z;
}

cplx zu_ct(const PiecewiseConstantInput& u, double omega, double tau, double beta) {
    if (tau < 0.0) throw Error(ErrorKind::Domain, "zu_ct: negative tau");
    std::vector<double> a, w, ea;
    ct_points(u, tau, beta, a, w, ea);
    return zu_points(a, w, ea, omega, beta);
}

// ===========================================================================
// GramContext
// ===========================================================================

GramContext::GramContext(const Dataset& d, const KernelSpec& spec, double tol, DiscreteSum mode)
    : d_(d), spec_(spec), tol_(tol), mode_(mode) {
    d_.validate();
    spec_.validate();
    if (spec_.axis != d_.axis) throw Error(ErrorKind::Domain, "kernel and dataset axes differ");
    for (double tau : d_.sample_times) {
        TauData td;
        if (d_.axis == Axis::Discrete) {
            const auto& u = d_.discrete_input();
            const auto T = static_cast<long long>(tau);
            // phi_{u,tau}(t) = alpha^t sum_{s<=t} u_{tau-s} + sum_{s>t} alpha^s u_{tau-s}
            std::vector<double> suffix(static_cast<std::size_t>(T) + 2, 0.0);
            for (long long s = T; s >= 0; --s) {
                suffix[static_cast<std::size_t>(s)] =
                    suffix[static_cast<std::size_t>(s) + 1] +
                    std::pow(spec_.alpha, static_cast<double>(s)) * u.at(T - s);
            }
            td.phi_u.resize(static_cast<std::size_t>(T) + 1);
            double prefix = 0.0;
            for (long long t = 0; t <= T; ++t) {
                prefix += u.at(T - t);
                td.phi_u[static_cast<std::size_t>(t)] =
                    spec_.gamma * (std::pow(spec_.alpha, static_cast<double>(t)) * prefix +
                                   suffix[static_cast<std::size_t>(t) + 1]);
            }
            td.input_sum = prefix;  // phi_{u,tau}(t) = gamma alpha^t input_sum for t >= tau
        } else {
            ct_points(d_.pwc_input(), tau, spec_.beta, td.a, td.w, td.ea);
        }
        cache_.emplace(tau, std::move(td));
    }
}

const GramContext::TauData& GramContext::tau_data(double tau) const {
    const auto it = cache_.find(tau);
    if (it == cache_.end()) {
        throw Error(ErrorKind::Index, fmt::format("time {} is not a sample time of the dataset", tau));
    }
    return it->second;
}

std::vector<cplx> GramContext::phi_omega_table(double omega, long long n) const {
    std::vector<cplx> table(static_cast<std::size_t>(std::max<long long>(n, 0)));
    const bool closed = mode_ == DiscreteSum::Closed;
    for (long long t = 0; t < n; ++t) {
        table[static_cast<std::size_t>(t)] = phi_omega_dt(omega, t, spec_.alpha, tol_, closed);
    }
    return table;
}

cplx GramContext::input_transform(const TauData& td, double tau, double omega) const {
    if (d_.axis == Axis::Continuous) {
        return spec_.gamma * zu_points(td.a, td.w, td.ea, omega, spec_.beta);
    }
    const auto T = static_cast<long long>(tau);
    const auto table = phi_omega_table(omega, T + 1);
    const auto& u = d_.discrete_input();
    cplx z = 0.0;
    for (long long t = 0; t <= T; ++t) z += table[static_cast<std::size_t>(t)] * u.at(T - t);
    return spec_.gamma * z;
}

Zeta GramContext::freq_zeta(double omega2, double omega1) const {
    if (d_.axis == Axis::Continuous) return zeta(omega1, omega2, spec_.beta);
    if (mode_ == DiscreteSum::Closed) return zeta_dt(omega1, omega2, spec_.alpha);
    return zeta_dt_truncated(omega1, omega2, spec_.alpha, tol_);
}

cplx GramContext::freq_transform(BasisDescriptor::Kind kind, double omega2, double omega1) const {
    const Zeta z = freq_zeta(omega2, omega1);
    return spec_.gamma * (kind == BasisDescriptor::Kind::FreqReal ? z.r : z.i);
}

cplx GramContext::transform(const BasisDescriptor& g, double omega) const {
    if (g.kind == BasisDescriptor::Kind::Input) return input_transform(tau_data(g.value), g.value, omega);
    return freq_transform(g.kind, g.value, omega);
}

double GramContext::input_inner(double tau1, double tau2) const {
    if (tau1 > tau2) std::swap(tau1, tau2);
    const TauData& t1 = tau_data(tau1);
    const TauData& t2 = tau_data(tau2);
    if (d_.axis == Axis::Discrete) {
        // L_{u,tau1}(phi_{u,tau2}) = sum_{t<=tau1} u_{tau1-t} phi_{u,tau2}(t)
        const auto T1 = static_cast<long long>(tau1);
        const auto& u = d_.discrete_input();
        double s = 0.0;
        for (long long t = 0; t <= T1; ++t) s += u.at(T1 - t) * t2.phi_u[static_cast<std::size_t>(t)];
        return s;
    }
    const double b = spec_.beta;
    double s = 0.0;
    for (std::size_t i = 0; i < t1.a.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < t2.a.size(); ++j) {
            const bool first = t1.a[i] <= t2.a[j];
            const double m = first ? t1.a[i] : t2.a[j];
            const double em = first ? t1.ea[i] : t2.ea[j];
            row += t2.w[j] * (2.0 - 2.0 * em - b * m * (t1.ea[i] + t2.ea[j]));
        }
        s += t1.w[i] * row;
    }
    return spec_.gamma * s / (b * b);
}

double GramContext::inner(const BasisDescriptor& a0, const BasisDescriptor& b0) const {
    BasisDescriptor a = a0;
    BasisDescriptor b = b0;
    if (!a.is_freq() && !b.is_freq()) return input_inner(a.value, b.value);
    // Evaluate a frequency functional a on phi_b; with two frequency
    // functionals the smaller descriptor takes the evaluating role.
    if (!a.is_freq() || (b.is_freq() && desc_less(b, a))) std::swap(a, b);
    if (a.kind == BasisDescriptor::Kind::FreqImag && (a.value == 0.0)) return 0.0;
    const cplx z = transform(b, a.value);
    return a.kind == BasisDescriptor::Kind::FreqReal ? z.real() : z.imag();
}

double GramContext::value(const BasisDescriptor& g, double t) const {
    if (t < 0.0) throw Error(ErrorKind::Domain, "representer evaluated at negative time");
    if (d_.axis == Axis::Discrete) {
        if (t != std::floor(t)) throw Error(ErrorKind::Domain, "discrete representer needs integer time");
        const auto ti = static_cast<long long>(t);
        if (g.kind == BasisDescriptor::Kind::Input) {
            const TauData& td = tau_data(g.value);
            if (ti < static_cast<long long>(td.phi_u.size())) return td.phi_u[static_cast<std::size_t>(ti)];
            return spec_.gamma * std::pow(spec_.alpha, t) * td.input_sum;
        }
        const cplx p = spec_.gamma * phi_omega_dt(g.value, ti, spec_.alpha, tol_, mode_ == DiscreteSum::Closed);
        return g.kind == BasisDescriptor::Kind::FreqReal ? p.real() : p.imag();
    }
    if (g.kind == BasisDescriptor::Kind::Input) {
        tau_data(g.value);  // membership check
        const auto& u = d_.pwc_input();
        double s = 0.0;
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            const double hi = std::max(g.value - u.breakpoints[i], 0.0);
            if (hi == 0.0) break;
            const double lo = std::max(g.value - u.breakpoints[i + 1], 0.0);
            s += u.values[i] * psi(t, lo, hi, spec_.beta);
        }
        return spec_.gamma * s;
    }
    const cplx p = spec_.gamma * phi_omega_ct(g.value, t, spec_.beta);
    return g.kind == BasisDescriptor::Kind::FreqReal ? p.real() : p.imag();
}

Eigen::MatrixXd GramContext::gram(std::span<const BasisDescriptor> basis) const {
    const auto m = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd G(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i; j < m; ++j) {
            G(i, j) = inner(basis[static_cast<std::size_t>(i)], basis[static_cast<std::size_t>(j)]);
            G(j, i) = G(i, j);
        }
    }
    return G;
}

Eigen::MatrixXcd GramContext::transforms(std::span<const BasisDescriptor> basis,
                                         std::span<const double> omegas) const {
    const auto m = static_cast<Eigen::Index>(basis.size());
    const auto n = static_cast<Eigen::Index>(omegas.size());
    Eigen::MatrixXcd Z(m, n);
    long long tmax = -1;
    if (d_.axis == Axis::Discrete) {
        for (const auto& g : basis) {
            if (g.kind == BasisDescriptor::Kind::Input) tmax = std::max(tmax, static_cast<long long>(g.value));
        }
    }
    const auto& u_disc = d_.axis == Axis::Discrete ? &d_.discrete_input() : nullptr;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double w = omegas[static_cast<std::size_t>(k)];
        std::vector<cplx> table;
        if (tmax >= 0) table = phi_omega_table(w, tmax + 1);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto& g = basis[static_cast<std::size_t>(i)];
            if (g.kind == BasisDescriptor::Kind::Input && u_disc != nullptr) {
                // same summation as input_transform, sharing the phi table
                const auto T = static_cast<long long>(g.value);
                tau_data(g.value);
                cplx z = 0.0;
                for (long long t = 0; t <= T; ++t) z += table[static_cast<std::size_t>(t)] * u_disc->at(T - t);
                Z(i, k) = spec_.gamma * z;
            } else {
                Z(i, k) = transform(g, w);
            }
        }
    }
    return Z;
}

Eigen::VectorXcd GramContext::combined_transform(std::span<const BasisDescriptor> basis, const Eigen::VectorXd& x,
                                                 std::span<const double> omegas) const {
    if (static_cast<std::size_t>(x.size()) != basis.size())
        throw Error(ErrorKind::Domain, "combined_transform: coefficient count differs from basis size");
    const auto n = static_cast<Eigen::Index>(omegas.size());
    Eigen::VectorXcd r = Eigen::VectorXcd::Zero(n);
    // c_t = sum_i x_i u_{tau_i - t} over the discrete input elements
    std::vector<double> c;
    std::vector<std::size_t> rest;
    // real and imaginary elements at one frequency share a single zeta
    std::map<double, std::pair<double, double>> freq;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto& g = basis[i];
        if (g.kind == BasisDescriptor::Kind::Input && d_.axis == Axis::Discrete) {
            const auto T = static_cast<long long>(g.value);
            tau_data(g.value);
            if (c.size() < static_cast<std::size_t>(T + 1)) c.resize(static_cast<std::size_t>(T + 1), 0.0);
            const auto& u = d_.discrete_input();
            const double xi = x(static_cast<Eigen::Index>(i));
            for (long long t = 0; t <= T; ++t) c[static_cast<std::size_t>(t)] += xi * u.at(T - t);
        } else if (g.kind == BasisDescriptor::Kind::Input) {
            rest.push_back(i);
        } else {
            auto& [xr, xim] = freq[g.value];
            (g.kind == BasisDescriptor::Kind::FreqReal ? xr : xim) += x(static_cast<Eigen::Index>(i));
        }
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        const double w = omegas[static_cast<std::size_t>(k)];
        cplx s = 0.0;
        if (!c.empty()) {
            const auto table = phi_omega_table(w, static_cast<long long>(c.size()));
            cplx z = 0.0;
            for (std::size_t t = 0; t < c.size(); ++t) z += table[t] * c[t];
            s += spec_.gamma * z;
        }
        for (std::size_t i : rest) s += x(static_cast<Eigen::Index>(i)) * transform(basis[i], w);
        for (const auto& [w2, coef] : freq) {
            const Zeta z = freq_zeta(w2, w);
            s += spec_.gamma * (coef.first * z.r + coef.second * z.i);
        }
        r(k) = s;
    }
    return r;
}

double phi_u_value(const Dataset& d, const KernelSpec& spec, double tau, double t) {
    return GramContext(d, spec).value(BasisDescriptor::input(tau), t);
}

double inner_product(const Dataset& d, const KernelSpec& spec, const BasisDescriptor& a,
                     const BasisDescriptor& b, double tol) {
    return GramContext(d, spec, tol).inner(a, b);
}

}  // namespace fdid
