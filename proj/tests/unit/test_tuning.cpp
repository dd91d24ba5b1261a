#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "fdid/error.hpp"
#include "fdid/tuning.hpp"
#include "fixtures.hpp"

using namespace fdid;

namespace {

const FrequencyPartition& coarse() {
    static const auto p = uniform_partition(std::numbers::pi, 32);
    return p;
}

}  // namespace

TEST(Split, FirstRowsTrain) {
    TuneConfig c;
    c.train_count = 100;
    const Split s = make_split(c, 150);
    ASSERT_EQ(s.train.size(), 100u);
    ASSERT_EQ(s.validation.size(), 50u);
    EXPECT_EQ(s.train.back(), 99u);
    EXPECT_EQ(s.validation.front(), 100u);
}

TEST(Split, RejectsBadSplits) {
    TuneConfig c;
    c.train = {0, 1};
    c.validation = {1, 2};
    EXPECT_THROW(make_split(c, 3), Error);
    c.validation = {2};
    EXPECT_THROW(make_split(c, 4), Error);  // row 3 uncovered
    EXPECT_NO_THROW(make_split(c, 3));
    TuneConfig all;
    all.train_count = 5;
    EXPECT_THROW(make_split(all, 5), Error);
}

TEST(Grids, Defaults) {
    const auto l = default_lambda_grid();
    ASSERT_EQ(l.size(), 8u);
    EXPECT_DOUBLE_EQ(l.front(), 1e-4);
    EXPECT_DOUBLE_EQ(l.back(), 1e2);
    const auto a = default_decay_grid(Axis::Discrete);
    EXPECT_DOUBLE_EQ(a.front(), 0.5);
    EXPECT_DOUBLE_EQ(a.back(), 0.99);
    const auto b = default_decay_grid(Axis::Continuous);
    EXPECT_DOUBLE_EQ(b.front(), 0.1);
    EXPECT_NEAR(b.back(), 10.0, 1e-14);
}

TEST(ValidationError, ZeroModelGivesMeanSquare) {
    const Dataset d = fixture::example1_dataset(20, 20.0, 1);
    Model m = identify_unconstrained(d, KernelSpec::discrete(0.5), 1.0);
    m.x.setZero();
    const std::vector<std::size_t> v{3, 7, 11};
    const double expect = (d.outputs[3] * d.outputs[3] + d.outputs[7] * d.outputs[7] + d.outputs[11] * d.outputs[11]) / 3;
    EXPECT_DOUBLE_EQ(validation_error(m, d, v), expect);
}

TEST(ValidationError, ExactReferenceOnNoiseFreeDataIsZero) {
    const Dataset d = fixture::example1_dataset(40, kNoNoise, 2);
    Model m = identify_unconstrained(d, KernelSpec::discrete(0.5), 1.0);
    m.x.setZero();
    m.reference = example1_system();
    EXPECT_NEAR(validation_error(m, d, {20, 30, 39}), 0.0, 1e-24);
}

TEST(ValidationError, OracleDecayBeatsOverlyFastDecay) {
    // beta = -ln(0.6) versus a decay rate ten times larger, 20 seeds.
    const double beta = -std::log(0.6);
    int wins = 0;
    TuneConfig c;
    c.train_count = 70;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Dataset d = fixture::example1_dataset(100, 20.0, 100 + seed);
        const Split s = make_split(c, d.size());
        const KernelSpec base = KernelSpec::discrete(0.6);
        const double good = validation_error(d, s, base, {0.1, 0.6}, coarse(), 0.1);
        const double bad = validation_error(d, s, base, {0.1, std::exp(-10 * beta)}, coarse(), 0.1);
        wins += good <= bad;
    }
    EXPECT_GE(wins, 16);
}

TEST(Tune, SingletonGrid) {
    const Dataset d = fixture::example1_dataset(40, 20.0, 3);
    TuneConfig c;
    c.lambdas = {0.3};
    c.decays = {0.7};
    const auto r = tune(d, KernelSpec::discrete(0.5), coarse(), 0.1, c);
    EXPECT_EQ(r.best.lambda, 0.3);
    EXPECT_EQ(r.best.decay, 0.7);
    ASSERT_EQ(r.table.size(), 1u);
    EXPECT_EQ(r.table[0].v, r.best_v);
}

TEST(Tune, BestIsTableMinimumAndDeterministic) {
    const Dataset d = fixture::example1_dataset(60, 20.0, 4);
    TuneConfig c;
    c.train_count = 40;
    c.lambdas = {1e-3, 1e-1, 10.0};
    c.decays = {0.5, 0.7, 0.9};
    c.random_points = 3;
    c.seed = 9;
    const auto r = tune(d, KernelSpec::discrete(0.5), coarse(), 0.1, c);
    ASSERT_EQ(r.table.size(), 12u);
    for (const auto& row : r.table) EXPECT_GE(row.v, r.best_v);
    const auto r2 = tune(d, KernelSpec::discrete(0.5), coarse(), 0.1, c);
    EXPECT_EQ(r2.best.lambda, r.best.lambda);
    EXPECT_EQ(r2.best.decay, r.best.decay);
    for (std::size_t i = 0; i < r.table.size(); ++i) EXPECT_EQ(r.table[i].v, r2.table[i].v);
}

TEST(Tune, GridWithOracleMatchesOracleError) {
    const Dataset d = fixture::example1_dataset(80, 20.0, 5);
    TuneConfig c;
    c.train_count = 60;
    c.lambdas = {1e-2, 1e-1, 1.0};
    c.decays = {0.3, 0.6, 0.9};
    const auto r = tune(d, KernelSpec::discrete(0.5), coarse(), 0.1, c);
    const double oracle = validation_error(d, make_split(c, d.size()), KernelSpec::discrete(0.5), {0.1, 0.6}, coarse(), 0.1);
    EXPECT_LE(r.best_v, 1.05 * oracle);
}

TEST(Tune, TiesPreferLargerLambdaThenDecay) {
    // Identical outputs of zero give v = 0 everywhere.
    Dataset d = fixture::example1_dataset(20, kNoNoise, 6);
    for (double& y : d.outputs) y = 0.0;
    TuneConfig c;
    c.lambdas = {0.1, 1.0};
    c.decays = {0.5, 0.8};
    const auto r = tune(d, KernelSpec::discrete(0.5), coarse(), 0.1, c);
    EXPECT_EQ(r.best.lambda, 1.0);
    EXPECT_EQ(r.best.decay, 0.8);
}

TEST(Tune, FailuresAreRecordedAndAggregated) {
    const Dataset d = fixture::example1_dataset(20, 20.0, 7);
    TuneConfig c;
    c.lambdas = {-1.0, 0.5};
    c.decays = {0.5};
    const auto r = tune(d, KernelSpec::discrete(0.5), coarse(), 0.1, c);
    EXPECT_TRUE(std::isnan(r.table[0].v));
    EXPECT_FALSE(r.table[0].error.empty());
    EXPECT_EQ(r.best.lambda, 0.5);
    c.lambdas = {-1.0};
    EXPECT_THROW(tune(d, KernelSpec::discrete(0.5), coarse(), 0.1, c), Error);
}

TEST(Tune, TableCsv) {
    const Dataset d = fixture::example1_dataset(20, 20.0, 8);
    TuneConfig c;
    c.lambdas = {0.1, 1.0};
    c.decays = {0.5, 0.8};
    const auto r = tune(d, KernelSpec::discrete(0.5), coarse(), 0.1, c);
    const auto path = std::filesystem::temp_directory_path() / "fdid_tune_table.csv";
    write_tune_table(r, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "lambda,decay,v");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 4);
    std::filesystem::remove(path);
}
