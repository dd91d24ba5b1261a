#include "fdid/sim.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "fdid/error.hpp"

namespace fdid {

namespace {

using cplx = std::complex<double>;

std::vector<double> strip(std::vector<double> p) {
    auto it = std::find_if(p.begin(), p.end(), [](double c) { return c != 0.0; });
    p.erase(p.begin(), it);
    return p;
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

std::vector<double> poly_add(std::vector<double> a, std::vector<double> b) {
    if (a.size() < b.size()) std::swap(a, b);
    const std::size_t off = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); ++i) a[off + i] += b[i];
    return a;
}

std::vector<cplx> roots(const std::vector<double>& p) {
    const std::vector<double> q = strip(p);
    if (q.size() < 2) return {};
    const int n = static_cast<int>(q.size()) - 1;
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) comp(0, k) = -q[static_cast<std::size_t>(k) + 1] / q[0];
    for (int k = 1; k < n; ++k) comp(k, k - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    std::vector<cplx> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
    return out;
}

cplx horner(const std::vector<double>& p, cplx z) {
    cplx acc = 0.0;
    for (double c : p) acc = acc * z + c;
    return acc;
}

// Numerator padded to den.size() coefficients.
std::vector<double> padded_num(const RationalTF& tf) {
    std::vector<double> b(tf.den.size() - tf.num.size(), 0.0);
    b.insert(b.end(), tf.num.begin(), tf.num.end());
    return b;
}

bool is_integer_time(double t) { return t >= 0.0 && std::floor(t) == t; }

std::vector<double> discrete_run(const RationalTF& tf, const std::vector<double>& u) {
    const std::size_t n = tf.den.size() - 1;
    const std::vector<double> b = padded_num(tf);
    std::vector<double> y(u.size(), 0.0);
    for (std::size_t t = 0; t < u.size(); ++t) {
        double acc = 0.0;
        for (std::size_t k = 0; k <= n && k <= t; ++k) acc += b[k] * u[t - k];
        for (std::size_t k = 1; k <= n && k <= t; ++k) acc -= tf.den[k] * y[t - k];
        y[t] = acc / tf.den[0];
    }
    return y;
}

long long max_index(const std::vector<double>& times) {
    long long m = -1;
    for (double t : times) {
        if (!is_integer_time(t)) throw Error(ErrorKind::Domain, fmt::format("discrete time {} is not a non-negative integer", t));
        m = std::max(m, static_cast<long long>(t));
    }
    return m;
}

}  // namespace

RationalTF RationalTF::make(Axis axis, std::vector<double> num, std::vector<double> den) {
    RationalTF tf;
    tf.axis = axis;
    tf.den = strip(std::move(den));
    tf.num = strip(std::move(num));
    if (tf.den.empty()) throw Error(ErrorKind::Domain, "transfer function denominator is zero");
    for (double c : tf.den)
        if (!std::isfinite(c)) throw Error(ErrorKind::Domain, "non-finite denominator coefficient");
    for (double c : tf.num)
        if (!std::isfinite(c)) throw Error(ErrorKind::Domain, "non-finite numerator coefficient");
    if (tf.num.size() > tf.den.size()) throw Error(ErrorKind::Domain, "transfer function is improper");
    return tf;
}

std::vector<cplx> RationalTF::poles() const { return roots(den); }
std::vector<cplx> RationalTF::zeros() const { return roots(num); }

bool RationalTF::is_stable() const {
    for (const cplx& p : poles()) {
        if (axis == Axis::Discrete ? std::abs(p) >= 1.0 : p.real() >= 0.0) return false;
    }
    return true;
}

double RationalTF::feedthrough() const { return num.size() == den.size() ? num[0] / den[0] : 0.0; }

cplx RationalTF::eval(cplx z) const { return horner(num, z) / horner(den, z); }

cplx RationalTF::frequency_response(double omega) const {
    return eval(axis == Axis::Discrete ? std::polar(1.0, omega) : cplx(0.0, omega));
}

RationalTF operator+(const RationalTF& a, const RationalTF& b) {
    if (a.axis != b.axis) throw Error(ErrorKind::Domain, "transfer functions on different axes");
    return RationalTF::make(a.axis, poly_add(poly_mul(a.num, b.den), poly_mul(b.num, a.den)), poly_mul(a.den, b.den));
}

RationalTF operator*(const RationalTF& a, const RationalTF& b) {
    if (a.axis != b.axis) throw Error(ErrorKind::Domain, "transfer functions on different axes");
    return RationalTF::make(a.axis, poly_mul(a.num, b.num), poly_mul(a.den, b.den));
}

RationalTF example1_system() {
    const auto g1 = RationalTF::make(Axis::Discrete, {1.0}, {2.0, -1.0});
    const auto g2 = RationalTF::make(Axis::Discrete, {0.03, -0.03}, {1.0, 1.0, 0.9});
    return g1 + g2;
}

RationalTF example3_system() {
    return RationalTF::make(Axis::Continuous, {-2.0, -3.6, -2.095, -0.396}, {0.461, 2.628, 4.389, 2.662, 0.519});
}

StateSpace realize(const RationalTF& tf) {
    const int n = tf.order();
    const std::vector<double> b = padded_num(tf);
    StateSpace ss;
    ss.A = Eigen::MatrixXd::Zero(n, n);
    ss.B = Eigen::VectorXd::Zero(n);
    ss.C = Eigen::RowVectorXd::Zero(n);
    ss.D = b[0] / tf.den[0];
    for (int k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(k) + 1;
        const double ak = tf.den[i] / tf.den[0];
        ss.A(0, k) = -ak;
        ss.C(k) = b[i] / tf.den[0] - ss.D * ak;
    }
    for (int k = 1; k < n; ++k) ss.A(k, k - 1) = 1.0;
    if (n > 0) ss.B(0) = 1.0;
    return ss;
}

SimResult simulate(const RationalTF& tf, const Input& u, const std::vector<double>& times) {
    SimResult res;
    res.unstable = !tf.is_stable();
    res.y.assign(times.size(), 0.0);

    if (tf.axis == Axis::Discrete) {
        const auto* du = std::get_if<DiscreteInput>(&u);
        if (!du) throw Error(ErrorKind::Domain, "discrete system needs a discrete input");
        const long long last = max_index(times);
        if (last < 0) return res;
        std::vector<double> uu(static_cast<std::size_t>(last) + 1);
        for (long long t = 0; t <= last; ++t) uu[static_cast<std::size_t>(t)] = du->at(t);
        const std::vector<double> y = discrete_run(tf, uu);
        for (std::size_t i = 0; i < times.size(); ++i) res.y[i] = y[static_cast<std::size_t>(times[i])];
        return res;
    }

    const auto* pu = std::get_if<PiecewiseConstantInput>(&u);
    if (!pu) throw Error(ErrorKind::Domain, "continuous system needs a piecewise-constant input");
    for (double t : times)
        if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorKind::Domain, fmt::format("invalid sample time {}", t));

    const StateSpace ss = realize(tf);
    const int n = tf.order();

    std::vector<std::size_t> order(times.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = ss.A;
    aug.topRightCorner(n, 1) = ss.B;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    double tc = 0.0;
    auto advance = [&](double te) {
        const double h = te - tc;
        if (h <= 0.0) return;
        if (n > 0) {
            const Eigen::MatrixXd E = (aug * h).exp();
            x = E.topLeftCorner(n, n) * x + E.topRightCorner(n, 1) * pu->at(tc);
        }
        tc = te;
    };

    std::size_t k = 0;
    for (std::size_t idx : order) {
        const double te = times[idx];
        while (k < pu->breakpoints.size() && pu->breakpoints[k] < te) advance(pu->breakpoints[k++]);
        advance(te);
        res.y[idx] = (n > 0 ? ss.C.dot(x) : 0.0) + ss.D * pu->at(te);
    }
    return res;
}

std::vector<double> filter_signal(const RationalTF& tf, const std::vector<double>& x) {
    if (tf.axis != Axis::Discrete) throw Error(ErrorKind::Domain, "filter_signal needs a discrete transfer function");
    return discrete_run(tf, x);
}

std::vector<double> impulse_response_of(const RationalTF& tf, const std::vector<double>& grid) {
    std::vector<double> g(grid.size(), 0.0);
    if (tf.axis == Axis::Discrete) {
        const long long last = max_index(grid);
        if (last < 0) return g;
        std::vector<double> u(static_cast<std::size_t>(last) + 1, 0.0);
        u[0] = 1.0;
        const std::vector<double> y = discrete_run(tf, u);
        for (std::size_t i = 0; i < grid.size(); ++i) g[i] = y[static_cast<std::size_t>(grid[i])];
        return g;
    }
    const StateSpace ss = realize(tf);
    if (tf.order() == 0) return g;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0) continue;
        g[i] = ss.C.dot((ss.A * grid[i]).exp() * ss.B);
    }
    return g;
}

double Rng::uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double v1, v2, s;
    do {
        v1 = 2.0 * uniform() - 1.0;
        v2 = 2.0 * uniform() - 1.0;
        s = v1 * v1 + v2 * v2;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v2 * f;
    has_spare_ = true;
    return v1 * f;
}

std::vector<double> add_noise_snr(const std::vector<double>& y, double snr_db, std::uint64_t seed) {
    if (y.empty()) throw Error(ErrorKind::Domain, "cannot add noise to an empty output");
    if (std::isnan(snr_db)) throw Error(ErrorKind::Domain, "SNR is NaN");
    if (std::isinf(snr_db) && snr_db > 0.0) return y;
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(y.size());
    if (var == 0.0) throw Error(ErrorKind::Domain, "output has zero variance; SNR is undefined");
    const double sigma = std::sqrt(var * std::pow(10.0, -snr_db / 10.0));
    Rng rng(seed);
    std::vector<double> out(y);
    for (double& v : out) v += sigma * rng.normal();
    return out;
}

DiscreteInput white_gaussian_input(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    DiscreteInput u;
    u.samples.resize(n);
    for (double& v : u.samples) v = rng.normal();
    return u;
}

PiecewiseConstantInput random_switching_input(double t_end, double min_hold, double max_hold, std::uint64_t seed) {
    if (!(min_hold > 0.0) || !(max_hold >= min_hold) || !(t_end >= 0.0) || !std::isfinite(t_end))
        throw Error(ErrorKind::Domain, "invalid switching-input parameters");
    Rng rng(seed);
    PiecewiseConstantInput u;
    double t = 0.0;
    u.breakpoints.push_back(t);
    while (t <= t_end) {
        u.values.push_back(rng.uniform() < 0.5 ? -1.0 : 1.0);
        t += rng.uniform(min_hold, max_hold);
        u.breakpoints.push_back(t);
    }
    return u;
}

std::vector<double> jittered_times(std::size_t n, double ts, std::uint64_t seed) {
    if (!(ts > 0.0)) throw Error(ErrorKind::Domain, "sampling period must be positive");
    Rng rng(seed);
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) t[k] = static_cast<double>(k) * ts + rng.uniform(0.0, ts);
    return t;
}

}  // namespace fdid
