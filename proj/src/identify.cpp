#include "fdid/identify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <fmt/format.h>

#include "fdid/error.hpp"

namespace fdid {

namespace {

void check_params(double lambda, double eps) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw Error(ErrorKind::Domain, fmt::format("lambda must be positive and finite, got {}", lambda));
    if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::Domain, fmt::format("eps must lie in (0, 1), got {}", eps));
}

const GramContext& context_of(const Model& m) {
    if (!m.ctx) throw Error(ErrorKind::Domain, "model has no evaluation context");
    return *m.ctx;
}

}  // namespace

Identifier::Identifier(std::shared_ptr<const GramContext> ctx, FrequencyPartition p, std::vector<std::size_t> rows,
                       double rho, AssembleOptions opts)
    : ctx_(std::move(ctx)), p_(std::move(p)), rho_(rho), opts_(opts) {
    if (!ctx_) throw Error(ErrorKind::Domain, "identifier needs a Gram context");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw Error(ErrorKind::Domain, "rho must be positive and finite");
    if (p_.omegas.empty() || p_.omegas.front() != 0.0) throw Error(ErrorKind::Domain, "partition must start at 0");
    const Dataset& d = ctx_->dataset();
    if (rows.empty()) {
        rows.resize(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) rows[i] = i;
    }
    for (std::size_t r : rows) {
        if (r >= d.size()) throw Error(ErrorKind::Index, "training row out of range");
        inputs_.push_back(BasisDescriptor::input(d.sample_times[r]));
        y_.push_back(d.outputs[r] / rho_);
    }
    if (inputs_.size() > opts_.max_dim)
        throw Error(ErrorKind::Resource, fmt::format("{} samples exceed the dimension cap {}", inputs_.size(), opts_.max_dim));
    if (static_cast<double>(inputs_.size()) * static_cast<double>(p_.omegas.size()) >
        static_cast<double>(opts_.max_cache_entries))
        throw Error(ErrorKind::Resource, fmt::format("{} samples x {} frequencies exceed the transform cache cap {}",
                                                     inputs_.size(), p_.omegas.size(), opts_.max_cache_entries));
    phi_uu_ = ctx_->gram(inputs_);
    t_u_ = ctx_->transforms(inputs_, p_.omegas);
}

Model Identifier::base_model(double lambda, double eps) const {
    Model m;
    m.spec = ctx_->spec();
    m.ctx = ctx_;
    m.lambda = lambda;
    m.eps = eps;
    m.rho = rho_;
    m.gain = rho_;
    return m;
}

Model Identifier::solve_on(const std::vector<std::size_t>& active, double lambda, double eps,
                           const SolverConfig& cfg) const {
    const auto n = static_cast<Eigen::Index>(inputs_.size());
    const auto k = static_cast<Eigen::Index>(active.size());
    const std::size_t dim = inputs_.size() + 2 * active.size();
    if (dim > opts_.max_dim)
        throw Error(ErrorKind::Resource, fmt::format("problem dimension {} exceeds the cap {}", dim, opts_.max_dim));

    std::vector<BasisDescriptor> desc = inputs_;
    for (std::size_t a : active) {
        desc.push_back(BasisDescriptor::freq_real(p_.omegas[a]));
        desc.push_back(BasisDescriptor::freq_imag(p_.omegas[a]));
    }
    const auto m = n + 2 * k;
    Eigen::MatrixXd phi(m, m);
    phi.topLeftCorner(n, n) = phi_uu_;
    for (Eigen::Index q = 0; q < k; ++q) {
        const auto a = static_cast<Eigen::Index>(active[static_cast<std::size_t>(q)]);
        const Eigen::VectorXd re = t_u_.col(a).real();
        // F^(i)_0 is the zero functional; its Gram entries are exactly zero.
        const Eigen::VectorXd im = p_.omegas[static_cast<std::size_t>(a)] == 0.0 ? Eigen::VectorXd::Zero(n)
                                                                                 : Eigen::VectorXd(t_u_.col(a).imag());
        phi.block(0, n + 2 * q, n, 1) = re;
        phi.block(0, n + 2 * q + 1, n, 1) = im;
        phi.block(n + 2 * q, 0, 1, n) = re.transpose();
        phi.block(n + 2 * q + 1, 0, 1, n) = im.transpose();
    }
    for (Eigen::Index i = n; i < m; ++i) {
        for (Eigen::Index j = i; j < m; ++j) {
            phi(i, j) = ctx_->inner(desc[static_cast<std::size_t>(i)], desc[static_cast<std::size_t>(j)]);
            phi(j, i) = phi(i, j);
        }
    }
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(y_.data(), n);
    const GramProblem gp = make_gram_problem(std::move(phi), desc, inputs_.size(), y, lambda, eps, opts_.jitter);

    Model model = base_model(lambda, eps);
    model.report = k == 0 ? solve_ridge(gp) : solve_qcqp(gp, cfg);
    model.x = model.report.x;
    model.descriptors = std::move(desc);
    for (std::size_t a : active) model.active.push_back(p_.omegas[a]);
    return model;
}

void Identifier::certify(Model& m) const {
    m.mesh = p_.mesh;
    m.omega_max = ctx_->spec().axis == Axis::Discrete ? std::numbers::pi : omega_max_ct(ctx_->spec(), y_, m.lambda);
    try {
        m.mesh_bound = mesh_bound(ctx_->spec(), y_, m.lambda, m.eps);
    } catch (const Error& e) {
        m.mesh_bound = 0.0;
        m.warnings.push_back(fmt::format("no mesh bound: {}", e.what()));
    }
    const bool covers = p_.omega_max() >= m.omega_max * (1.0 - 1e-12);
    m.certified = covers && p_.mesh <= m.mesh_bound;
    if (!covers)
        m.warnings.push_back(fmt::format("partition ends at {} below omega_max {}; not certified", p_.omega_max(), m.omega_max));
    if (p_.mesh > m.mesh_bound)
        m.warnings.push_back(fmt::format("partition mesh {:.3g} exceeds the guaranteed mesh {:.3g}; not certified",
                                         p_.mesh, m.mesh_bound));
}

Model Identifier::solve(double lambda, double eps, const SolverConfig& cfg) const {
    check_params(lambda, eps);
    const auto n = static_cast<Eigen::Index>(inputs_.size());
    const auto np = p_.omegas.size();
    std::vector<std::size_t> active;
    std::vector<char> is_active(np, 0);
    std::map<std::size_t, Eigen::MatrixXcd> fcols;  // transforms of active frequency functionals over P
    std::vector<IterationRecord> trace;

    for (std::size_t iter = 0; iter <= np; ++iter) {
        Model m = solve_on(active, lambda, eps, cfg);
        Eigen::VectorXcd F = t_u_.transpose() * m.x.head(n).cast<cplx>();
        for (std::size_t q = 0; q < active.size(); ++q) {
            const auto& fc = fcols.at(active[q]);
            F += m.x(n + 2 * static_cast<Eigen::Index>(q)) * fc.row(0).transpose();
            F += m.x(n + 2 * static_cast<Eigen::Index>(q) + 1) * fc.row(1).transpose();
        }
        IterationRecord rec;
        rec.active = active.size();
        rec.objective = m.report.objective;
        rec.max_violation = -std::numeric_limits<double>::infinity();
        std::vector<std::size_t> added;
        for (std::size_t j = 0; j < np; ++j) {
            const double excess = std::norm(F(static_cast<Eigen::Index>(j))) - (1.0 - eps);
            rec.max_violation = std::max(rec.max_violation, excess);
            if (!is_active[j] && excess > 0.0) added.push_back(j);
        }
        rec.added = added.size();
        trace.push_back(rec);
        if (added.empty()) {
            m.trace = std::move(trace);
            certify(m);
            return m;
        }
        for (std::size_t j : added) {
            is_active[j] = 1;
            const double w = p_.omegas[j];
            const BasisDescriptor pair[2] = {BasisDescriptor::freq_real(w), BasisDescriptor::freq_imag(w)};
            fcols.emplace(j, ctx_->transforms(pair, p_.omegas));
        }
        active.insert(active.end(), added.begin(), added.end());
        std::sort(active.begin(), active.end());
    }
    throw Error(ErrorKind::NonConvergence, "constraint activation did not terminate");
}

Model Identifier::solve_full(double lambda, double eps, const SolverConfig& cfg) const {
    check_params(lambda, eps);
    std::vector<std::size_t> all(p_.omegas.size());
    for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
    Model m = solve_on(all, lambda, eps, cfg);
    IterationRecord rec;
    rec.active = all.size();
    rec.objective = m.report.objective;
    m.trace = {rec};
    certify(m);
    return m;
}

Model Identifier::solve_unconstrained(double lambda) const {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw Error(ErrorKind::Domain, fmt::format("lambda must be positive and finite, got {}", lambda));
    Model m = solve_on({}, lambda, 0.0, SolverConfig{});
    m.constrained = false;
    IterationRecord rec;
    rec.objective = m.report.objective;
    m.trace = {rec};
    return m;
}

Model identify(const Dataset& d, const KernelSpec& spec, const FrequencyPartition& p, double lambda, double eps,
               const SolverConfig& cfg, const IdentifyOptions& opts) {
    if (d.axis != spec.axis) throw Error(ErrorKind::Domain, "dataset and kernel are on different axes");
    auto ctx = std::make_shared<const GramContext>(d, spec, opts.tol, opts.discrete_sum);
    return Identifier(std::move(ctx), p, {}, opts.rho, opts.assemble).solve(lambda, eps, cfg);
}

Model identify_unconstrained(const Dataset& d, const KernelSpec& spec, double lambda, const IdentifyOptions& opts) {
    if (d.axis != spec.axis) throw Error(ErrorKind::Domain, "dataset and kernel are on different axes");
    auto ctx = std::make_shared<const GramContext>(d, spec, opts.tol, opts.discrete_sum);
    return Identifier(std::move(ctx), uniform_partition(0.0, 0), {}, opts.rho, opts.assemble).solve_unconstrained(lambda);
}

cplx constraint_response(const Model& m, double omega) {
    const double w[1] = {omega};
    return constraint_response(m, std::span<const double>(w, 1))(0);
}

Eigen::VectorXcd constraint_response(const Model& m, std::span<const double> omegas) {
    const GramContext& ctx = context_of(m);
    if (m.descriptors.empty()) return Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(omegas.size()));
    return ctx.combined_transform(m.descriptors, m.x, omegas);
}

cplx frequency_response(const Model& m, double omega) {
    const double w[1] = {omega};
    return frequency_response(m, std::span<const double>(w, 1))(0);
}

Eigen::VectorXcd frequency_response(const Model& m, std::span<const double> omegas) {
    return frequency_response(m, omegas, constraint_response(m, omegas));
}

Eigen::VectorXcd frequency_response(const Model& m, std::span<const double> omegas, const Eigen::VectorXcd& constraint) {
    if (static_cast<std::size_t>(constraint.size()) != omegas.size())
        throw Error(ErrorKind::Domain, "frequency_response: response length differs from grid");
    Eigen::VectorXcd r = m.gain * constraint;
    r.array() += m.feedthrough;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        if (m.post_filter) r(k) *= m.post_filter->frequency_response(omegas[i]);
        if (m.reference) r(k) += m.reference->frequency_response(omegas[i]);
    }
    return r;
}

namespace {

double base_impulse(const Model& m, const GramContext& ctx, double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.descriptors.size(); ++i)
        s += m.x(static_cast<Eigen::Index>(i)) * ctx.value(m.descriptors[i], t);
    s *= m.gain;
    if (m.spec.axis == Axis::Discrete && t == 0.0) s += m.feedthrough;
    return s;
}

}  // namespace

double impulse_response(const Model& m, double t) {
    const double ts[1] = {t};
    return impulse_response(m, std::span<const double>(ts, 1))[0];
}

std::vector<double> impulse_response(const Model& m, std::span<const double> ts) {
    const GramContext& ctx = context_of(m);
    std::vector<double> out(ts.size());
    if (m.post_filter) {
        long long last = -1;
        for (double t : ts) {
            if (!(t >= 0.0) || t != std::floor(t))
                throw Error(ErrorKind::Domain, fmt::format("post-filtered impulse response needs integer t >= 0, got {}", t));
            last = std::max(last, static_cast<long long>(t));
        }
        std::vector<double> h(static_cast<std::size_t>(last + 1));
        for (std::size_t t = 0; t < h.size(); ++t) h[t] = base_impulse(m, ctx, static_cast<double>(t));
        const std::vector<double> g = filter_signal(*m.post_filter, h);
        for (std::size_t i = 0; i < ts.size(); ++i) out[i] = g[static_cast<std::size_t>(ts[i])];
    } else {
        for (std::size_t i = 0; i < ts.size(); ++i) out[i] = base_impulse(m, ctx, ts[i]);
    }
    if (m.reference) {
        const std::vector<double> r = impulse_response_of(*m.reference, std::vector<double>(ts.begin(), ts.end()));
        for (std::size_t i = 0; i < ts.size(); ++i) out[i] += r[i];
    }
    return out;
}

double predict(const Model& m, double tau) {
    const GramContext& ctx = context_of(m);
    if (m.post_filter) throw Error(ErrorKind::Domain, "prediction is not defined for a post-filtered model");
    const BasisDescriptor in = BasisDescriptor::input(tau);
    double s = 0.0;
    for (std::size_t i = 0; i < m.descriptors.size(); ++i)
        s += m.x(static_cast<Eigen::Index>(i)) * ctx.inner(in, m.descriptors[i]);
    s = m.gain * s + m.feedthrough * ctx.dataset().input_at(tau);
    if (m.reference) s += simulate(*m.reference, ctx.dataset().input, {tau}).y[0];
    return s;
}

HinfCheck hinf_grid_sup(const Model& m, const FrequencyPartition& grid) {
    return hinf_grid_sup(m, grid, constraint_response(m, grid.omegas));
}

HinfCheck hinf_grid_sup(const Model& m, const FrequencyPartition& grid, const Eigen::VectorXcd& F) {
    if (static_cast<std::size_t>(F.size()) != grid.omegas.size())
        throw Error(ErrorKind::Domain, "hinf_grid_sup: response length differs from grid");
    HinfCheck h;
    h.mesh = grid.mesh;
    h.magnitudes.resize(grid.omegas.size());
    double best = -1.0;
    for (std::size_t i = 0; i < grid.omegas.size(); ++i) {
        const double a = std::abs(F(static_cast<Eigen::Index>(i)));
        h.magnitudes[i] = a;
        if (a > best) {
            best = a;
            h.argmax = grid.omegas[i];
        }
    }
    h.grid_sup = std::max(best, 0.0);
    double L = std::numeric_limits<double>::infinity();
    try {
        L = lipschitz_factor(m.spec) * std::max(m.rkhs_norm_sq(), 0.0);
    } catch (const Error&) {
        // degenerate kernel: no certificate
    }
    h.lipschitz = L;
    h.certified_sup = std::sqrt(h.grid_sup * h.grid_sup + L * h.mesh / 2.0);
    return h;
}

double fit(std::span<const double> g_hat, std::span<const double> g_true) {
    if (g_hat.size() != g_true.size() || g_true.empty())
        throw Error(ErrorKind::Domain, "fit needs two non-empty responses on the same grid");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < g_true.size(); ++i) {
        num += (g_hat[i] - g_true[i]) * (g_hat[i] - g_true[i]);
        den += g_true[i] * g_true[i];
    }
    if (den == 0.0) throw Error(ErrorKind::UndefinedMetric, "fit is undefined for a zero true response");
    return 100.0 * (1.0 - std::sqrt(num) / std::sqrt(den));
}

}  // namespace fdid
