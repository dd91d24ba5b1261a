#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fdid/error.hpp"
#include "fdid/identify.hpp"
#include "fixtures.hpp"

using namespace fdid;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const GramContext> ctx_of(const Dataset& d, const KernelSpec& k) {
    return std::make_shared<const GramContext>(d, k);
}

double sup_over(const Model& m, const FrequencyPartition& p) { return hinf_grid_sup(m, p).grid_sup; }

}  // namespace

TEST(Identify, SmallOutputsStopAfterOneIteration) {
    Dataset d = fixture::example1_dataset(30, kNoNoise, 3);
    d = scale_outputs(d, 100.0);
    const KernelSpec k = KernelSpec::discrete(0.6);
    const auto p = uniform_partition(kPi, 64);
    const Model m = identify(d, k, p, 0.1, 0.1);
    EXPECT_EQ(m.iterations(), 1u);
    EXPECT_TRUE(m.active.empty());
    const Model r = identify_unconstrained(d, k, 0.1);
    ASSERT_EQ(m.x.size(), r.x.size());
    EXPECT_LT((m.x - r.x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Identify, ActivationMatchesFullyConstrainedSolve) {
    const Dataset d = fixture::example1_dataset(40, 20.0, 11);
    const KernelSpec k = KernelSpec::discrete(0.7);
    const auto p = uniform_partition(kPi, 24);
    const Identifier id(ctx_of(d, k), p);
    const Model act = id.solve(1e-3, 0.2);
    const Model full = id.solve_full(1e-3, 0.2);
    EXPECT_FALSE(act.active.empty());
    EXPECT_GT(act.iterations(), 1u);
    EXPECT_NEAR(act.report.objective, full.report.objective, 1e-6 * (1.0 + full.report.objective));
    const auto fine = uniform_partition(kPi, 500);
    const auto a = frequency_response(act, fine.omegas);
    const auto b = frequency_response(full, fine.omegas);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Identify, ConstraintsHoldOnThePartition) {
    const Dataset d = fixture::example1_dataset(60, 20.0, 5);
    const KernelSpec k = KernelSpec::discrete(0.8);
    const auto p = uniform_partition(kPi, 40);
    for (double eps : {0.05, 0.3}) {
        const Model m = identify(d, k, p, 1e-3, eps);
        EXPECT_LE(sup_over(m, p), std::sqrt(1.0 - eps) + 1e-9) << eps;
        ASSERT_FALSE(m.trace.empty());
        EXPECT_EQ(m.trace.back().added, 0u);
        for (std::size_t i = 1; i < m.trace.size(); ++i) EXPECT_GE(m.trace[i].active, m.trace[i - 1].active);
        for (std::size_t i = 0; i + 1 < m.active.size(); ++i) EXPECT_LT(m.active[i], m.active[i + 1]);
    }
}

TEST(Identify, ObjectiveGrowsWithEps) {
    const Dataset d = fixture::example1_dataset(50, 20.0, 8);
    const KernelSpec k = KernelSpec::discrete(0.7);
    const Identifier id(ctx_of(d, k), uniform_partition(kPi, 32));
    double prev = 0.0;
    for (double eps : {0.01, 0.2, 0.5, 0.8}) {
        const double f = id.solve_full(1e-3, eps).report.objective;
        EXPECT_GE(f, prev - 1e-9);
        prev = f;
    }
}

TEST(Identify, NormBoundedByDataOverLambda) {
    const Dataset d = fixture::example1_dataset(50, 20.0, 9);
    const double yy = sum_squares(d.outputs);
    for (double lambda : {1e-3, 1e-1, 10.0}) {
        const Model m = identify(d, KernelSpec::discrete(0.7), uniform_partition(kPi, 32), lambda, 0.1);
        EXPECT_LE(m.rkhs_norm_sq(), yy / lambda * (1 + 1e-9));
        EXPECT_LE(m.report.objective, yy * (1 + 1e-9));
    }
}

TEST(Identify, MidpointOfTwoFeasibleModelsIsFeasible) {
    // The feasible set is convex: averaging the coefficient vectors of the
    // eps = 0.1 solution on two datasets sharing the same basis stays feasible.
    const Dataset d = fixture::example1_dataset(30, 20.0, 21);
    const KernelSpec k = KernelSpec::discrete(0.7);
    const auto p = uniform_partition(kPi, 16);
    const Identifier id(ctx_of(d, k), p);
    Dataset d2 = d;
    for (auto& y : d2.outputs) y = -2.0 * y;
    const Identifier id2(ctx_of(d2, k), p);
    Model a = id.solve_full(1e-3, 0.1);
    const Model b = id2.solve_full(1e-3, 0.1);
    a.x = 0.5 * (a.x + b.x);
    EXPECT_LE(sup_over(a, p), std::sqrt(0.9) + 1e-9);
}

TEST(Identify, PredictionReproducesGramProduct) {
    const Dataset d = fixture::example1_dataset(25, 20.0, 4);
    const KernelSpec k = KernelSpec::discrete(0.6);
    auto ctx = ctx_of(d, k);
    const Model m = Identifier(ctx, uniform_partition(kPi, 16), {}, 2.0).solve(1e-2, 0.1);
    const Eigen::MatrixXd G = ctx->gram(m.descriptors);
    const Eigen::VectorXd Gx = G * m.x;
    for (std::size_t i = 0; i < d.size(); ++i)
        EXPECT_NEAR(predict(m, d.sample_times[i]), 2.0 * Gx(static_cast<Eigen::Index>(i)), 1e-10);
    // Discrete impulse response agrees with its own transform.
    std::vector<double> ts = fixture::int_times(400);
    const auto g = impulse_response(m, ts);
    cplx s = 0.0;
    for (std::size_t t = 0; t < g.size(); ++t) s += g[t] * std::exp(cplx(0.0, -0.7 * static_cast<double>(t)));
    EXPECT_LT(std::abs(s - frequency_response(m, 0.7)), 1e-8);
}

TEST(Identify, UnconstrainedScalesWithRho) {
    const Dataset d = fixture::example1_dataset(30, 20.0, 6);
    const KernelSpec k = KernelSpec::discrete(0.6);
    IdentifyOptions o;
    const Model a = identify_unconstrained(d, k, 0.05, o);
    o.rho = 3.0;
    const Model b = identify_unconstrained(d, k, 0.05, o);
    EXPECT_FALSE(a.constrained);
    for (double w : {0.0, 0.4, 2.0}) EXPECT_LT(std::abs(frequency_response(a, w) - frequency_response(b, w)), 1e-10);
}

TEST(Identify, ContinuousFrequencyFunctionalImpulse) {
    // phi^(r)_0(1) = int_0^inf e^{-max(1,s)} ds = 2/e for beta = 1.
    Dataset d;
    d.axis = Axis::Continuous;
    d.input = PiecewiseConstantInput{{0.0, 1.0}, {1.0}};
    d.sample_times = {0.5};
    d.outputs = {0.1};
    Model m;
    m.spec = KernelSpec::continuous(1.0);
    m.ctx = ctx_of(d, m.spec);
    m.descriptors = {BasisDescriptor::freq_real(0.0)};
    m.x = Eigen::VectorXd::Ones(1);
    EXPECT_NEAR(impulse_response(m, 1.0), 2.0 * std::exp(-1.0), 1e-13);
}

TEST(Identify, Example1SupStaysBelowOne) {
    const Dataset d = fixture::example1_dataset(100, 20.0, 1);
    const KernelSpec k = KernelSpec::discrete(0.8);
    const Model m = identify(d, k, uniform_partition(kPi, 314), 1e-2, 0.01);
    const auto fine = uniform_partition(kPi, 20000);
    EXPECT_LE(sup_over(m, fine), 1.0);
}

TEST(Identify, CertificationFollowsTheMeshBound) {
    Dataset d = fixture::example1_dataset(20, 20.0, 2);
    const KernelSpec k = KernelSpec::discrete(0.5);
    const double lambda = 20.0, eps = 0.5;
    std::vector<double> y = d.outputs;
    const double bound = mesh_bound(k, y, lambda, eps);
    const auto p = build_partition(kPi, bound);
    const Model m = identify(d, k, p, lambda, eps);
    EXPECT_TRUE(m.certified);
    EXPECT_TRUE(m.warnings.empty());
    const auto fine = uniform_partition(kPi, 50000);
    EXPECT_LE(sup_over(m, fine), 1.0);
    const HinfCheck h = hinf_grid_sup(m, p);
    EXPECT_GE(h.certified_sup, sup_over(m, fine) - 1e-12);

    const Model coarse = identify(d, k, uniform_partition(kPi, 3), lambda, eps);
    EXPECT_FALSE(coarse.certified);
    EXPECT_FALSE(coarse.warnings.empty());
}

TEST(Identify, RejectsBadParameters) {
    const Dataset d = fixture::example1_dataset(10, kNoNoise, 1);
    const auto p = uniform_partition(kPi, 8);
    EXPECT_THROW(identify(d, KernelSpec::discrete(0.5), p, 0.0, 0.1), Error);
    EXPECT_THROW(identify(d, KernelSpec::discrete(0.5), p, 1.0, 0.0), Error);
    EXPECT_THROW(identify(d, KernelSpec::discrete(0.5), p, 1.0, 1.0), Error);
    EXPECT_THROW(identify(d, KernelSpec::continuous(1.0), p, 1.0, 0.1), Error);
    IdentifyOptions o;
    o.assemble.max_dim = 5;
    try {
        identify(d, KernelSpec::discrete(0.5), p, 1.0, 0.1, {}, o);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Resource);
    }
}

TEST(Fit, Examples) {
    const std::vector<double> g{1.0, 0.5, 0.25};
    EXPECT_DOUBLE_EQ(fit(g, g), 100.0);
    const std::vector<double> z(3, 0.0);
    EXPECT_DOUBLE_EQ(fit(z, g), 0.0);
    try {
        fit(g, z);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UndefinedMetric);
    }
    EXPECT_THROW(fit(std::vector<double>{1.0}, g), Error);
}
