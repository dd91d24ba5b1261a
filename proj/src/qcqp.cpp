#include "fdid/qcqp.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "fdid/error.hpp"

namespace fdid {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Problem data in coordinates w with x = T w, T = U_r S_r^{-1/2} from the
// eigen-decomposition Phi = U S U'. Eigenvalues at or below the cutoff are
// treated as null directions; on the retained range x'Phi x = ||w||^2 exactly.
struct Whitened {
    MatrixXd T;   // m x r
    MatrixXd Mu;  // A T
    MatrixXd WB;  // T' B
    MatrixXd WC;  // T' C
    double cutoff = 0.0;
};

Whitened whiten(const GramProblem& p) {
    const auto m = p.phi.rows();
    Whitened wh;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(p.phi);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::Singular, "eigen-decomposition of Phi failed");
    double scale = m > 0 ? p.phi.trace() / static_cast<double>(m) : 0.0;
    wh.cutoff = p.jitter * std::max(scale, 0.0);
    const auto& ev = es.eigenvalues();  // ascending
    Eigen::Index first = 0;
    while (first < m && !(ev(first) > wh.cutoff)) ++first;
    const auto r = m - first;
    if (m > 0 && first > 0 && ev(0) < -1e-6 * std::max(scale, 1e-300))
        throw Error(ErrorKind::Singular, fmt::format("Phi has a negative eigenvalue {:.3g}", ev(0)));
    wh.T = es.eigenvectors().rightCols(r) * ev.tail(r).cwiseSqrt().cwiseInverse().asDiagonal();
    wh.Mu = p.A * wh.T;
    wh.WB = wh.T.transpose() * p.B;
    wh.WC = wh.T.transpose() * p.C;
    return wh;
}

void check_solver_input(const GramProblem& p) {
    p.validate();
    if (!(1.0 - p.eps > 0.0)) throw Error(ErrorKind::Domain, "1 - eps must be positive");
}

void fill_report(const GramProblem& p, SolveReport& r) {
    const VectorXd phix = p.phi * r.x;
    r.rkhs_norm_sq = r.x.dot(phix);
    const VectorXd res = p.A * r.x - p.y;
    r.objective = res.squaredNorm() + p.lambda * r.rkhs_norm_sq;
    const auto nc = p.B.cols();
    r.slacks.resize(static_cast<std::size_t>(nc));
    r.feasible = true;
    const VectorXd sb = p.B.transpose() * r.x, sc = p.C.transpose() * r.x;
    for (Eigen::Index j = 0; j < nc; ++j) {
        const double s = 1.0 - p.eps - sb(j) * sb(j) - sc(j) * sc(j);
        r.slacks[static_cast<std::size_t>(j)] = s;
        if (s < -1e-9) r.feasible = false;
    }
    if (!r.x.allFinite() || !std::isfinite(r.objective)) throw Error(ErrorKind::Numeric, "solution contains non-finite values");
}

class BarrierNewton {
public:
    BarrierNewton(const GramProblem& p, const Whitened& wh, const SolverConfig& cfg)
        : p_(p), wh_(wh), cfg_(cfg), r_(1.0 - p.eps) {
        const auto r = wh.T.cols();
        G0_ = MatrixXd::Identity(r, r) * p.lambda;
        G0_.selfadjointView<Eigen::Lower>().rankUpdate(wh.Mu.transpose());
        Muy_ = wh.Mu.transpose() * p.y;
        gtol_ = cfg.newton_tol * (1.0 + Muy_.norm());
    }

    // Returns +inf outside the strictly feasible set.
    double value(const VectorXd& w, double theta) const {
        const VectorXd sb = wh_.WB.transpose() * w, sc = wh_.WC.transpose() * w;
        double bar = 0.0;
        for (Eigen::Index j = 0; j < sb.size(); ++j) {
            const double slack = 0.5 * (r_ - sb(j) * sb(j) - sc(j) * sc(j));
            if (!(slack > 0.0)) return std::numeric_limits<double>::infinity();
            bar -= std::log(slack);
        }
        return 0.5 * (wh_.Mu * w - p_.y).squaredNorm() + 0.5 * p_.lambda * w.squaredNorm() + theta * bar;
    }

    // Minimizes the stage objective from w (strictly feasible); returns the
    // number of Newton steps taken.
    int run(VectorXd& w, double theta) const {
        const auto m = w.size();
        const auto nc = wh_.WB.cols();
        for (int it = 0; it < cfg_.max_newton; ++it) {
            const VectorXd sb = wh_.WB.transpose() * w, sc = wh_.WC.transpose() * w;
            VectorXd g = G0_.selfadjointView<Eigen::Lower>() * w - Muy_;
            MatrixXd H = G0_;
            if (nc > 0 && theta > 0.0) {
                MatrixXd Z(m, 2 * nc);
                VectorXd cb(nc), cc(nc);
                for (Eigen::Index j = 0; j < nc; ++j) {
                    const double q = 0.5 * (r_ - sb(j) * sb(j) - sc(j) * sc(j));  // -p_j > 0
                    cb(j) = theta * sb(j) / q;
                    cc(j) = theta * sc(j) / q;
                    // theta (I/q + s s'/q^2) = R R' with R upper triangular
                    const double a = theta * (1.0 / q + sb(j) * sb(j) / (q * q));
                    const double b = theta * sb(j) * sc(j) / (q * q);
                    const double c = theta * (1.0 / q + sc(j) * sc(j) / (q * q));
                    const double r22 = std::sqrt(c);
                    const double r12 = b / r22;
                    const double r11 = std::sqrt(std::max(a - r12 * r12, 0.0));
                    Z.col(2 * j) = r11 * wh_.WB.col(j);
                    Z.col(2 * j + 1) = r12 * wh_.WB.col(j) + r22 * wh_.WC.col(j);
                }
                g += wh_.WB * cb + wh_.WC * cc;
                H.selfadjointView<Eigen::Lower>().rankUpdate(Z);
            }
            if (!g.allFinite()) throw Error(ErrorKind::Numeric, "non-finite barrier gradient");
            if (g.norm() <= gtol_) return it;

            Eigen::LLT<MatrixXd, Eigen::Lower> hf(H);
            if (hf.info() != Eigen::Success) throw Error(ErrorKind::Numeric, "barrier Hessian factorization failed");
            const VectorXd d = -hf.solve(g);
            const double gd = g.dot(d);
            if (!std::isfinite(gd)) throw Error(ErrorKind::Numeric, "non-finite Newton step");
            const double f0 = value(w, theta);
            const double dec2 = -gd;

            // Remaining decrease at rounding level: take the full step and stop.
            if (dec2 <= 1e-14 * (1.0 + std::abs(f0))) {
                const VectorXd wn = w + d;
                if (std::isfinite(value(wn, theta))) w = wn;
                return it + 1;
            }

            double t = 1.0;
            double f1 = value(w + t * d, theta);
            const double slack = 1e-15 * (1.0 + std::abs(f0));
            while (!(f1 <= f0 + cfg_.ls_slope * t * gd + slack)) {
                t *= cfg_.ls_shrink;
                if (t < 1e-20)
                    throw Error(ErrorKind::NonConvergence,
                                fmt::format("line search stalled (theta {:.3g}, decrement^2 {:.3g})", theta, dec2));
                f1 = value(w + t * d, theta);
            }
            w += t * d;
        }
        throw Error(ErrorKind::NonConvergence,
                    fmt::format("Newton did not converge in {} iterations at theta {:.3g}", cfg_.max_newton, theta));
    }

private:
    const GramProblem& p_;
    const Whitened& wh_;
    const SolverConfig& cfg_;
    double r_;
    MatrixXd G0_;
    VectorXd Muy_;
    double gtol_ = 0.0;
};

}  // namespace

void SolverConfig::validate() const {
    if (!(theta0 > 0.0) || !(theta_decay > 1.0) || !(barrier_tol > 0.0) || !(newton_tol > 0.0) || max_newton < 1 ||
        !(ls_slope > 0.0 && ls_slope < 0.5) || !(ls_shrink > 0.0 && ls_shrink < 1.0))
        throw Error(ErrorKind::Config, "invalid solver configuration");
}

SolveReport solve_ridge(const GramProblem& p) {
    check_solver_input(p);
    if (p.n_constraints() != 0) throw Error(ErrorKind::Domain, "solve_ridge needs a problem without constraints");
    SolveReport r;
    const auto m = p.phi.rows();
    if (p.aliased && static_cast<Eigen::Index>(p.n_d) == m) {
        MatrixXd K = p.phi;
        K.diagonal().array() += p.lambda;
        Eigen::LLT<MatrixXd> f(K);
        if (f.info() != Eigen::Success) throw Error(ErrorKind::Singular, "Phi + lambda I is not positive definite");
        r.x = f.solve(p.y);
    } else {
        const Whitened wh = whiten(p);
        const auto rk = wh.T.cols();
        MatrixXd H = MatrixXd::Identity(rk, rk) * p.lambda;
        H.selfadjointView<Eigen::Lower>().rankUpdate(wh.Mu.transpose());
        Eigen::LLT<MatrixXd, Eigen::Lower> hf(H);
        if (hf.info() != Eigen::Success) throw Error(ErrorKind::Singular, "normal equations are not positive definite");
        const VectorXd w = hf.solve(wh.Mu.transpose() * p.y);
        r.x = wh.T * w;
        r.cutoff = wh.cutoff;
        r.rank = static_cast<int>(wh.T.cols());
    }
    r.stages = 1;
    fill_report(p, r);
    r.stage_objectives = {r.objective};
    return r;
}

double barrier_objective(const GramProblem& p, const Eigen::VectorXd& x, double theta) {
    const VectorXd sb = p.B.transpose() * x, sc = p.C.transpose() * x;
    double bar = 0.0;
    for (Eigen::Index j = 0; j < sb.size(); ++j) {
        const double slack = 0.5 * (1.0 - p.eps) - 0.5 * sb(j) * sb(j) - 0.5 * sc(j) * sc(j);
        if (!(slack > 0.0)) throw Error(ErrorKind::Infeasible, fmt::format("constraint {} violated or active", j));
        bar -= std::log(slack);
    }
    return 0.5 * (p.A * x - p.y).squaredNorm() + 0.5 * p.lambda * x.dot(p.phi * x) + theta * bar;
}

GradHess barrier_grad_hess(const GramProblem& p, const Eigen::VectorXd& x, double theta) {
    GradHess gh;
    gh.grad = p.A.transpose() * (p.A * x - p.y) + p.lambda * (p.phi * x);
    gh.hess = p.A.transpose() * p.A + p.lambda * p.phi;
    const VectorXd sb = p.B.transpose() * x, sc = p.C.transpose() * x;
    for (Eigen::Index j = 0; j < sb.size(); ++j) {
        const double pj = 0.5 * sb(j) * sb(j) + 0.5 * sc(j) * sc(j) - 0.5 * (1.0 - p.eps);
        if (!(pj < 0.0)) throw Error(ErrorKind::Infeasible, fmt::format("constraint {} violated or active", j));
        const VectorXd dp = sb(j) * p.B.col(j) + sc(j) * p.C.col(j);
        gh.grad -= theta / pj * dp;
        gh.hess -= theta / pj * (p.B.col(j) * p.B.col(j).transpose() + p.C.col(j) * p.C.col(j).transpose());
        gh.hess += theta / (pj * pj) * dp * dp.transpose();
    }
    gh.hess = 0.5 * (gh.hess + gh.hess.transpose()).eval();
    return gh;
}

SolveReport solve_qcqp(const GramProblem& p, const SolverConfig& cfg) {
    cfg.validate();
    check_solver_input(p);
    const Whitened wh = whiten(p);
    const BarrierNewton newton(p, wh, cfg);
    const auto nc = static_cast<double>(p.n_constraints());

    SolveReport r;
    r.cutoff = wh.cutoff;
    r.rank = static_cast<int>(wh.T.cols());
    VectorXd w = VectorXd::Zero(wh.T.cols());
    double theta = nc > 0 ? cfg.theta0 : 0.0;
    while (true) {
        r.newton_iterations += newton.run(w, theta);
        ++r.stages;
        r.x = wh.T * w;
        const VectorXd res = p.A * r.x - p.y;
        r.stage_objectives.push_back(res.squaredNorm() + p.lambda * r.x.dot(p.phi * r.x));
        if (nc == 0 || theta * nc < cfg.barrier_tol) break;
        theta /= cfg.theta_decay;
    }
    // Halved objective gap theta * n_c, doubled for the reported objective.
    r.duality_gap = 2.0 * theta * nc;
    fill_report(p, r);
    return r;
}

}  // namespace fdid
