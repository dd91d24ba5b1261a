#include "fdid/kernels.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fdid/error.hpp"

namespace fdid {

const char* to_string(ErrorKind k) noexcept {
    switch (k) {
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::NotFound: return "not_found";
        case ErrorKind::InvalidKernel: return "invalid_kernel";
        case ErrorKind::Index: return "index";
        case ErrorKind::Singular: return "singular";
        case ErrorKind::NonConvergence: return "non_convergence";
        case ErrorKind::Numeric: return "numeric";
        case ErrorKind::Infeasible: return "infeasible";
        case ErrorKind::Resource: return "resource";
        case ErrorKind::Config: return "config";
        case ErrorKind::InvalidSupplyRate: return "invalid_supply_rate";
        case ErrorKind::InvalidWeight: return "invalid_weight";
        case ErrorKind::UndefinedMetric: return "undefined_metric";
    }
    return "unknown";
}

const char* to_string(Axis a) noexcept {
    return a == Axis::Discrete ? "discrete" : "continuous";
}

KernelSpec KernelSpec::discrete(double alpha, double gamma) {
    KernelSpec k;
    k.axis = Axis::Discrete;
    k.alpha = alpha;
    k.beta = alpha > 0.0 ? -std::log(alpha) : std::numeric_limits<double>::infinity();
    k.gamma = gamma;
    k.validate();
    return k;
}

KernelSpec KernelSpec::continuous(double beta, double gamma) {
    KernelSpec k;
    k.axis = Axis::Continuous;
    k.beta = beta;
    k.alpha = std::exp(-beta);
    k.gamma = gamma;
    k.validate();
    return k;
}

KernelSpec KernelSpec::with_decay(double decay) const {
    return axis == Axis::Discrete ? discrete(decay, gamma) : continuous(decay, gamma);
}

void KernelSpec::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw Error(ErrorKind::InvalidKernel, "kernel scale gamma must be positive and finite");
    }
    if (axis == Axis::Discrete) {
        if (!(alpha >= 0.0 && alpha < 1.0)) {
            throw Error(ErrorKind::InvalidKernel, "discrete TC kernel needs 0 <= alpha < 1, got " +
                                                      std::to_string(alpha));
        }
    } else if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw Error(ErrorKind::InvalidKernel, "continuous TC kernel needs beta > 0, got " +
                                                  std::to_string(beta));
    }
}

double kernel_eval(const KernelSpec& spec, double s, double t) {
    if (s < 0.0 || t < 0.0) {
        throw Error(ErrorKind::Domain, "kernel_eval: negative time argument");
    }
    const double m = std::max(s, t);
    if (spec.axis == Axis::Discrete) {
        return spec.gamma * std::pow(spec.alpha, m);
    }
    return spec.gamma * std::exp(-spec.beta * m);
}

namespace {

void check_order(int n) {
    if (n != 0 && n != 1) {
        throw Error(ErrorKind::Domain, "kernel moments are defined for n in {0, 1}");
    }
}

}  // namespace

double kernel_moments(const KernelSpec& spec, int n, double tol) {
    check_order(n);
    if (!(tol > 0.0)) {
        throw Error(ErrorKind::Domain, "kernel_moments: tol must be positive");
    }
    spec.validate();
    const double sg = std::sqrt(spec.gamma);
    if (spec.axis == Axis::Continuous) {
        // int_0^inf t^n e^{-beta t / 2} dt = n! (2/beta)^(n+1)
        const double r = 2.0 / spec.beta;
        return n == 0 ? sg * r : sg * r * r;
    }
    const double q = std::sqrt(spec.alpha);
    return n == 0 ? sg / (1.0 - q) : sg * q / ((1.0 - q) * (1.0 - q));
}

double kernel_moments_truncated(const KernelSpec& spec, int n, double tol) {
    check_order(n);
    if (!(tol > 0.0)) {
        throw Error(ErrorKind::Domain, "kernel_moments: tol must be positive");
    }
    spec.validate();
    const double sg = std::sqrt(spec.gamma);
    const double b = spec.beta;
    // Starting horizon from the exponential tail; then grown until the exact
    // tail bound of the truncated sum/integral is below tol.
    double T = std::ceil((2.0 / b) * std::log(std::max(sg / (tol * b / 2.0), 1.0)));
    if (!std::isfinite(T)) T = 0.0;
    if (spec.axis == Axis::Continuous) {
        // int_T^inf t^n e^{-bt/2} = e^{-bT/2} (2/b) (T + 2/b)^n for n in {0,1}
        auto tail = [&](double T_) {
            const double r = 2.0 / b;
            return sg * std::exp(-b * T_ / 2.0) * r * (n == 0 ? 1.0 : (T_ + r));
        };
        while (tail(T) > tol) T += 1.0;
        const double r = 2.0 / b;
        const double e = std::exp(-b * T / 2.0);
        if (n == 0) return sg * r * (1.0 - e);
        return sg * (r * r - e * r * (T + r));
    }
    const double q = std::sqrt(spec.alpha);
    auto tail = [&](double T_) {
        // sum_{t > T} t^n q^t
        const double qT = std::pow(q, T_ + 1.0);
        if (n == 0) return sg * qT / (1.0 - q);
        return sg * qT * ((T_ + 1.0) * (1.0 - q) + q) / ((1.0 - q) * (1.0 - q));
    };
    while (tail(T) > tol) T += 1.0;
    double sum = 0.0;
    const auto last = static_cast<long long>(T);
    for (long long t = last; t >= 0; --t) {  // small terms first
        const double td = static_cast<double>(t);
        sum += (n == 0 ? 1.0 : td) * std::pow(q, td);
    }
    return sg * sum;
}

KernelMoments kernel_moment_pair(const KernelSpec& spec) {
    return {kernel_moments(spec, 0), kernel_moments(spec, 1), MomentMethod::Analytic};
}

double mu_bound(const KernelSpec& spec, int n) {
    if (n < 0) {
        throw Error(ErrorKind::Domain, "mu_bound: n must be nonnegative");
    }
    spec.validate();
    const double sg = std::sqrt(spec.gamma);
    const double r = 2.0 / spec.beta;  // 0 when alpha == 0
    double bound = sg * std::pow(r, n + 1) * std::tgamma(n + 1.0);
    if (spec.axis == Axis::Discrete) {
        // Peak of t^n e^{-beta t/2}, attained at t = 2n/beta (value 1 for n = 0).
        const double peak = n == 0 ? 1.0 : std::pow(r * n / std::exp(1.0), n);
        bound += sg * peak;
    }
    if (!std::isfinite(bound)) {
        throw Error(ErrorKind::Numeric, "mu_bound overflows: decay too close to the stability limit");
    }
    return bound;
}

}  // namespace fdid
