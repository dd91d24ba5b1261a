#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "fdid/model_io.hpp"
#include "fdid/signals.hpp"
#include "fdid/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "fdid");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = fdid::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("fdid_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    std::string p(const std::string& name) const { return (dir / name).string(); }

    fs::path dir;
};

}  // namespace

TEST_F(Cli, SimulateWritesDeterministicRows) {
    ASSERT_EQ(run({"simulate", "example1", "--snr", "14.5", "--seed", "7", "--n", "150", "--out", p("a.csv")}).code, 0);
    ASSERT_EQ(run({"simulate", "example1", "--snr", "14.5", "--seed", "7", "--n", "150", "--out", p("b.csv")}).code, 0);
    const std::string a = slurp(p("a.csv"));
    EXPECT_EQ(a, slurp(p("b.csv")));
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 151);
}

TEST_F(Cli, SimulateNoiseFree) {
    ASSERT_EQ(run({"simulate", "example1", "--snr", "inf", "--seed", "3", "--n", "40", "--out", p("d.csv")}).code, 0);
    const fdid::Dataset d = fdid::load_dataset(p("d.csv"), fdid::Axis::Discrete);
    const auto y = fdid::simulate(fdid::example1_system(), d.input, d.sample_times).y;
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_EQ(d.outputs[i], y[i]);
}

TEST_F(Cli, SimulateContinuousWritesInputFile) {
    ASSERT_EQ(run({"simulate", "example3", "--n", "20", "--out", p("c.csv")}).code, 0);
    EXPECT_TRUE(fs::exists(p("c_input.csv")));
    const fdid::Dataset d = fdid::load_dataset(p("c.csv"), fdid::Axis::Continuous, p("c_input.csv"));
    EXPECT_EQ(d.size(), 20u);
}

TEST_F(Cli, Example1PipelineStaysWithinTheBound) {
    ASSERT_EQ(run({"simulate", "example1", "--snr", "14.5", "--seed", "7", "--n", "150", "--out", p("d.csv")}).code, 0);
    const Result r = run({"identify", "--data", p("d.csv"), "--alpha", "0.8", "--lambda", "0.01", "--eps", "1e-5",
                          "--truth-system", "example1", "--out-dir", p("o"), "--gnuplot"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json rep = json::parse(r.out);
    EXPECT_LE(rep["hinf_sup"].get<double>(), 1.000001);
    EXPECT_TRUE(rep.contains("fit"));
    EXPECT_EQ(rep["n_intervals"].get<int>(), 20000);
    for (const char* f : {"model.json", "freq.csv", "impulse.csv", "report.json", "plot.gp"})
        EXPECT_TRUE(fs::exists(dir / "o" / f)) << f;

    std::ifstream freq(dir / "o" / "freq.csv");
    std::string line;
    std::getline(freq, line);
    EXPECT_EQ(line, "omega,re,im,mag");
    int rows = 0;
    while (std::getline(freq, line)) {
        double w, re, im, mag;
        char c;
        std::istringstream ss(line);
        ss >> w >> c >> re >> c >> im >> c >> mag;
        const double ref = std::sqrt(re * re + im * im);
        EXPECT_LE(std::abs(mag - ref), std::nextafter(ref, INFINITY) - ref);
        ++rows;
    }
    EXPECT_EQ(rows, 200001);

    const Result ev = run({"evaluate", "--model", p("o/model.json"), "--truth-system", "example1", "--out-dir", p("e")});
    ASSERT_EQ(ev.code, 0) << ev.err;
    EXPECT_DOUBLE_EQ(json::parse(ev.out)["fit"].get<double>(), rep["fit"].get<double>());
}

TEST_F(Cli, ReductionModes) {
    ASSERT_EQ(run({"simulate", "example1", "--snr", "30", "--n", "60", "--out", p("d.csv")}).code, 0);
    const std::vector<std::string> base{"identify", "--data", p("d.csv"), "--lambda", "0.1", "--n-intervals", "32"};
    auto with = [&](std::vector<std::string> extra) {
        auto a = base;
        a.insert(a.end(), extra.begin(), extra.end());
        return run(a);
    };
    Result r = with({"--supply", "4,0,-1", "--out-dir", p("s")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["mode"], "dissipativity");
    r = with({"--reference-num", "0.5", "--reference-den", "1,-0.5", "--out-dir", p("r")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["mode"], "reference");
    r = with({"--weight-num", "1,0", "--weight-den", "1,-0.5", "--out-dir", p("w")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["mode"], "weighted");
    EXPECT_EQ(with({"--supply", "4,0,-1", "--weight-num", "1", "--weight-den", "1"}).code, 2);
    EXPECT_EQ(with({"--supply", "4,0,-1", "--rho", "2"}).code, 2);
    EXPECT_EQ(with({"--supply", "1,0,1"}).code, 2);
    EXPECT_EQ(with({"--weight-num", "1,-2", "--weight-den", "1,0"}).code, 2);
}

TEST_F(Cli, Errors) {
    Result r = run({"identify", "--data", p("missing.csv"), "--lambda", "1"});
    EXPECT_EQ(r.code, 2);
    const json e = json::parse(r.err);
    EXPECT_NE(e["error"]["message"].get<std::string>().find("dataset not found"), std::string::npos);

    ASSERT_EQ(run({"simulate", "example1", "--n", "20", "--out", p("d.csv")}).code, 0);
    EXPECT_EQ(run({"identify", "--data", p("d.csv"), "--lambda", "1", "--eps", "1.5"}).code, 2);
    EXPECT_EQ(run({"identify", "--data", p("d.csv"), "--lambda", "-1"}).code, 2);
    EXPECT_EQ(run({"identify", "--data", p("d.csv")}).code, 2);
    EXPECT_EQ(run({"simulate", "nosuch", "--out", p("x.csv")}).code, 2);
    EXPECT_EQ(run({}).code, 2);

    std::ofstream(p("bad.csv")) << "t,u,y\n0,1,x\n";
    r = run({"identify", "--data", p("bad.csv"), "--lambda", "1"});
    EXPECT_EQ(r.code, 3) << r.err;
    EXPECT_EQ(json::parse(r.err)["error"]["exit_code"], 3);

    EXPECT_EQ(fdid::cli::exit_code(fdid::ErrorKind::NonConvergence), 4);
    EXPECT_EQ(fdid::cli::exit_code(fdid::ErrorKind::Resource), 4);
    EXPECT_EQ(fdid::cli::exit_code(fdid::ErrorKind::Parse), 3);
}

TEST_F(Cli, TuneTableAndSingleton) {
    ASSERT_EQ(run({"simulate", "example1", "--snr", "20", "--n", "60", "--out", p("d.csv")}).code, 0);
    Result r = run({"tune", "--data", p("d.csv"), "--lambdas", "0.3", "--decays", "0.7", "--n-intervals", "16",
                    "--out-dir", p("t1")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json best = json::parse(r.out);
    EXPECT_EQ(best["lambda"].get<double>(), 0.3);
    EXPECT_EQ(best["decay"].get<double>(), 0.7);

    const std::vector<std::string> args{"tune", "--data", p("d.csv"), "--lambdas", "0.01,0.1,1",
                                        "--decays", "0.5,0.8", "--train-count", "40", "--n-intervals", "16"};
    auto a1 = args, a2 = args;
    a1.insert(a1.end(), {"--out-dir", p("t2")});
    a2.insert(a2.end(), {"--out-dir", p("t3")});
    ASSERT_EQ(run(a1).code, 0);
    ASSERT_EQ(run(a2).code, 0);
    const std::string table = slurp(p("t2/tune.csv"));
    EXPECT_EQ(table, slurp(p("t3/tune.csv")));
    EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 7);
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
    ASSERT_EQ(run({"simulate", "example1", "--n", "40", "--snr", "20", "--out", p("d.csv")}).code, 0);
    std::ofstream(p("run.toml")) << "[identify]\nlambda = 0.5\neps = 0.01\nn-intervals = 16\nalpha = 0.6\n";
    Result r = run({"--config", p("run.toml"), "identify", "--data", p("d.csv"), "--out-dir", p("o")});
    ASSERT_EQ(r.code, 0) << r.err;
    json rep = json::parse(r.out);
    EXPECT_EQ(rep["lambda"].get<double>(), 0.5);
    EXPECT_EQ(rep["kernel"]["alpha"].get<double>(), 0.6);
    r = run({"--config", p("run.toml"), "identify", "--data", p("d.csv"), "--lambda", "2", "--out-dir", p("o")});
    ASSERT_EQ(r.code, 0) << r.err;
    rep = json::parse(r.out);
    EXPECT_EQ(rep["lambda"].get<double>(), 2.0);
    EXPECT_EQ(rep["eps"].get<double>(), 0.01);
}
