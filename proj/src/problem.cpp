#include "fdid/problem.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "fdid/error.hpp"

namespace fdid {

namespace {

constexpr char kPhiMagic[8] = {'F', 'D', 'I', 'D', 'P', 'H', 'I', '1'};

void check_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw Error(ErrorKind::Domain, fmt::format("lambda must be positive and finite, got {}", lambda));
}

void check_eps(double eps) {
    if (!(eps >= 0.0 && eps < 1.0)) throw Error(ErrorKind::Domain, fmt::format("eps must lie in [0, 1), got {}", eps));
}

template <class T>
void put_le(std::ostream& os, T v) {
    std::array<char, sizeof(T)> buf;
    std::memcpy(buf.data(), &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf.begin(), buf.end());
    os.write(buf.data(), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    std::array<char, sizeof(T)> buf;
    if (!is.read(buf.data(), sizeof(T))) throw Error(ErrorKind::Parse, "truncated Phi dump");
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf.begin(), buf.end());
    T v;
    std::memcpy(&v, buf.data(), sizeof(T));
    return v;
}

}  // namespace

double omega_max_ct(const KernelSpec& spec, const std::vector<double>& y, double lambda) {
    check_lambda(lambda);
    if (y.empty()) throw Error(ErrorKind::Domain, "output vector is empty");
    const double sy = sum_squares(y);
    if (sy == 0.0) return 0.0;
    return std::sqrt(std::max(0.0, 2.0 * spec.gamma * sy / lambda - spec.beta * spec.beta));
}

double omega_max(const KernelSpec& spec, const std::vector<double>& y, double lambda) {
    return spec.axis == Axis::Discrete ? std::numbers::pi : omega_max_ct(spec, y, lambda);
}

double lipschitz_factor(const KernelSpec& spec, MomentSource src) {
    double m0, m1;
    if (src == MomentSource::Exact) {
        m0 = kernel_moments(spec, 0);
        m1 = kernel_moments(spec, 1);
    } else {
        m0 = mu_bound(spec, 0);
        m1 = mu_bound(spec, 1);
    }
    if (!(m0 > 0.0) || !(m1 > 0.0))
        throw Error(ErrorKind::Domain, "degenerate kernel: mu_0 * mu_1 = 0 gives no Lipschitz bound");
    return 4.0 * m0 * m1;
}

double mesh_bound(const KernelSpec& spec, const std::vector<double>& y, double lambda, double eps, MomentSource src) {
    check_lambda(lambda);
    if (!(eps > 0.0)) throw Error(ErrorKind::Domain, "eps must be positive for a mesh bound");
    const double L = lipschitz_factor(spec, src);
    const double sy = sum_squares(y);
    if (sy == 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 * eps * lambda / (L * sy);
}

FrequencyPartition uniform_partition(double omega_max, std::size_t n) {
    if (!(omega_max >= 0.0) || !std::isfinite(omega_max))
        throw Error(ErrorKind::Domain, fmt::format("omega_max must be finite and >= 0, got {}", omega_max));
    FrequencyPartition p;
    if (omega_max == 0.0 || n == 0) {
        p.omegas = {0.0};
        if (omega_max > 0.0) p.omegas.push_back(omega_max);
        p.mesh = omega_max;
        return p;
    }
    p.omegas.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) p.omegas[i] = omega_max * static_cast<double>(i) / static_cast<double>(n);
    p.omegas.back() = omega_max;
    for (std::size_t i = 1; i <= n; ++i) p.mesh = std::max(p.mesh, p.omegas[i] - p.omegas[i - 1]);
    return p;
}

FrequencyPartition build_partition(double omega_max, double mesh_target) {
    if (!(omega_max >= 0.0) || !std::isfinite(omega_max))
        throw Error(ErrorKind::Domain, fmt::format("omega_max must be finite and >= 0, got {}", omega_max));
    if (!(mesh_target > 0.0)) throw Error(ErrorKind::Domain, "mesh target must be positive");
    if (omega_max == 0.0) return uniform_partition(0.0, 0);
    const double q = omega_max / mesh_target;
    if (!(q < 1e8)) throw Error(ErrorKind::Resource, fmt::format("partition would need {:.3g} intervals", q));
    // Absorb rounding in the quotient so that e.g. pi / (pi/3141) gives 3141.
    const double r = std::round(q);
    const double n = std::abs(q - r) <= 1e-9 * q ? r : std::ceil(q);
    return uniform_partition(omega_max, static_cast<std::size_t>(std::max(1.0, n)));
}

FrequencyPartition partition_from(std::vector<double> omegas) {
    std::sort(omegas.begin(), omegas.end());
    omegas.erase(std::unique(omegas.begin(), omegas.end()), omegas.end());
    if (omegas.empty() || omegas.front() != 0.0) throw Error(ErrorKind::Domain, "partition must start at 0");
    if (!std::isfinite(omegas.back())) throw Error(ErrorKind::Domain, "partition frequencies must be finite");
    FrequencyPartition p;
    p.omegas = std::move(omegas);
    for (std::size_t i = 1; i < p.omegas.size(); ++i) p.mesh = std::max(p.mesh, p.omegas[i] - p.omegas[i - 1]);
    return p;
}

void GramProblem::validate() const {
    check_lambda(lambda);
    check_eps(eps);
    const auto m = phi.rows();
    if (phi.cols() != m) throw Error(ErrorKind::Domain, "Phi must be square");
    if (A.cols() != m || A.rows() != y.size()) throw Error(ErrorKind::Domain, "objective rows do not match Phi / y");
    if (B.rows() != m || C.rows() != m || B.cols() != C.cols())
        throw Error(ErrorKind::Domain, "constraint vectors do not match Phi");
    if (!phi.allFinite() || !A.allFinite() || !B.allFinite() || !C.allFinite() || !y.allFinite())
        throw Error(ErrorKind::Numeric, "problem data contains non-finite values");
}

GramProblem make_gram_problem(Eigen::MatrixXd phi, std::vector<BasisDescriptor> descriptors, std::size_t n_d,
                              Eigen::VectorXd y, double lambda, double eps, double jitter) {
    const auto m = static_cast<std::size_t>(phi.rows());
    if (n_d > m || (m - n_d) % 2 != 0) throw Error(ErrorKind::Domain, "basis layout does not match Phi");
    if (!descriptors.empty() && descriptors.size() != m) throw Error(ErrorKind::Domain, "descriptor count mismatch");
    const auto nd = static_cast<Eigen::Index>(n_d);
    const auto nc = static_cast<Eigen::Index>((m - n_d) / 2);
    GramProblem p;
    p.A = phi.topRows(nd);
    p.B.resize(phi.rows(), nc);
    p.C.resize(phi.rows(), nc);
    for (Eigen::Index j = 0; j < nc; ++j) {
        p.B.col(j) = phi.col(nd + 2 * j);
        p.C.col(j) = phi.col(nd + 2 * j + 1);
    }
    p.phi = std::move(phi);
    p.y = std::move(y);
    p.lambda = lambda;
    p.eps = eps;
    p.jitter = jitter;
    p.n_d = n_d;
    p.aliased = true;
    if (!descriptors.empty()) {
        for (Eigen::Index j = 0; j < nc; ++j) p.omegas.push_back(descriptors[static_cast<std::size_t>(nd + 2 * j)].value);
    }
    p.descriptors = std::move(descriptors);
    p.validate();
    return p;
}

GramProblem make_general_problem(Eigen::MatrixXd phi, Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C,
                                 Eigen::VectorXd y, double lambda, double eps, double jitter) {
    GramProblem p;
    p.phi = std::move(phi);
    p.A = std::move(A);
    p.B = std::move(B);
    p.C = std::move(C);
    p.y = std::move(y);
    p.lambda = lambda;
    p.eps = eps;
    p.jitter = jitter;
    p.n_d = static_cast<std::size_t>(p.A.rows());
    p.validate();
    return p;
}

std::vector<BasisDescriptor> layout(const Dataset& d, std::span<const double> omegas) {
    std::vector<BasisDescriptor> out;
    out.reserve(d.size() + 2 * omegas.size());
    for (double t : d.sample_times) out.push_back(BasisDescriptor::input(t));
    for (double w : omegas) {
        out.push_back(BasisDescriptor::freq_real(w));
        out.push_back(BasisDescriptor::freq_imag(w));
    }
    return out;
}

GramProblem assemble(const GramContext& ctx, std::span<const double> omegas, double lambda, double eps,
                     const AssembleOptions& opts) {
    check_lambda(lambda);
    check_eps(eps);
    const Dataset& d = ctx.dataset();
    const std::size_t m = d.size() + 2 * omegas.size();
    if (m > opts.max_dim)
        throw Error(ErrorKind::Resource, fmt::format("problem dimension {} exceeds the cap {}", m, opts.max_dim));
    auto desc = layout(d, omegas);
    Eigen::MatrixXd phi = ctx.gram(desc);
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(d.outputs.data(), static_cast<Eigen::Index>(d.size()));
    return make_gram_problem(std::move(phi), std::move(desc), d.size(), std::move(y), lambda, eps, opts.jitter);
}

GramProblem assemble(const Dataset& d, const KernelSpec& spec, const FrequencyPartition& p, double lambda, double eps,
                     double tol, const AssembleOptions& opts) {
    if (d.axis != spec.axis) throw Error(ErrorKind::Domain, "dataset and kernel are on different axes");
    const GramContext ctx(d, spec, tol);
    return assemble(ctx, p.omegas, lambda, eps, opts);
}

void write_phi(const Eigen::MatrixXd& phi, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::NotFound, fmt::format("cannot open {} for writing", path.string()));
    os.write(kPhiMagic, sizeof kPhiMagic);
    put_le<std::uint64_t>(os, static_cast<std::uint64_t>(phi.rows()));
    for (Eigen::Index i = 0; i < phi.rows(); ++i)
        for (Eigen::Index j = 0; j < phi.cols(); ++j) put_le<double>(os, phi(i, j));
    if (!os) throw Error(ErrorKind::Resource, fmt::format("failed writing {}", path.string()));
}

Eigen::MatrixXd read_phi(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorKind::NotFound, fmt::format("Phi dump not found: {}", path.string()));
    char magic[8];
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kPhiMagic, sizeof magic) != 0)
        throw Error(ErrorKind::Parse, "not a Phi dump (bad magic)");
    const auto m = get_le<std::uint64_t>(is);
    if (m > 100000) throw Error(ErrorKind::Parse, "implausible Phi dimension");
    const auto n = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd phi(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) phi(i, j) = get_le<double>(is);
    return phi;
}

}  // namespace fdid
