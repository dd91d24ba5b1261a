#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>

#include "fdid/error.hpp"
#include "fdid/model_io.hpp"
#include "fdid/reductions.hpp"
#include "fixtures.hpp"

using namespace fdid;

TEST(ExactString, RoundTripsDoubles) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-10.0, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const double v = U(rng) * std::pow(10.0, U(rng) * 20.0);
        EXPECT_EQ(parse_exact(exact_string(v)), v);
    }
    EXPECT_EQ(parse_exact(exact_string(std::numeric_limits<double>::infinity())), std::numeric_limits<double>::infinity());
    EXPECT_EQ(parse_exact(exact_string(5e-324)), 5e-324);
    EXPECT_THROW(parse_exact("1.0x"), Error);
    EXPECT_THROW(parse_exact(""), Error);
}

TEST(ModelIo, DiscreteRoundTripIsExact) {
    const Dataset d = fixture::example1_dataset(40, 20.0, 2);
    IdentifyOptions o;
    o.rho = 1.5;
    const Model m = identify(d, KernelSpec::discrete(0.7), uniform_partition(std::numbers::pi, 32), 1e-4, 0.5, {}, o);
    ASSERT_FALSE(m.active.empty());
    const Model l = model_from_json(model_to_json(m));
    EXPECT_EQ(l.x, m.x);
    EXPECT_EQ(l.descriptors, m.descriptors);
    EXPECT_EQ(l.active, m.active);
    EXPECT_EQ(l.certified, m.certified);
    EXPECT_EQ(l.mesh_bound, m.mesh_bound);
    EXPECT_EQ(l.iterations(), m.iterations());
    EXPECT_EQ(l.rkhs_norm_sq(), m.rkhs_norm_sq());
    for (double w : {0.0, 0.3, 3.0}) EXPECT_EQ(frequency_response(l, w), frequency_response(m, w));
    for (double t : {0.0, 1.0, 17.0}) EXPECT_EQ(impulse_response(l, t), impulse_response(m, t));
    EXPECT_EQ(predict(l, 5.0), predict(m, 5.0));
    EXPECT_EQ(model_to_json(l), model_to_json(m));
}

TEST(ModelIo, ContinuousWithBackMapsRoundTrips) {
    const Dataset d = fixture::example3_dataset(30, 0.1, 20.0, 4);
    const Dataset dd = delta_reduce(d, RationalTF::make(Axis::Continuous, {0.5}, {1.0, 2.0}));
    Model m = identify_unconstrained(dd, KernelSpec::continuous(1.3), 0.05);
    m.reference = RationalTF::make(Axis::Continuous, {0.5}, {1.0, 2.0});
    m.feedthrough = 0.25;
    const auto path = std::filesystem::temp_directory_path() / "fdid_model_io_test.json";
    save_model(m, path);
    const Model l = load_model(path);
    std::filesystem::remove(path);
    ASSERT_TRUE(l.reference.has_value());
    EXPECT_EQ(l.reference->den, m.reference->den);
    EXPECT_FALSE(l.constrained);
    for (double w : {0.0, 1.0, 7.0}) EXPECT_EQ(frequency_response(l, w), frequency_response(m, w));
    EXPECT_EQ(impulse_response(l, 0.9), impulse_response(m, 0.9));
}

TEST(ModelIo, Errors) {
    try {
        load_model("/nonexistent/model.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotFound);
    }
    for (const char* bad : {"{", "{}", R"({"format":"other"})", "[1,2]"}) {
        try {
            model_from_json(bad);
            FAIL() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::Parse) << bad;
        }
    }
}
