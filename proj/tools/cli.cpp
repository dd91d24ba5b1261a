#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "fdid/identify.hpp"
#include "fdid/model_io.hpp"
#include "fdid/reductions.hpp"
#include "fdid/sim.hpp"
#include "fdid/tuning.hpp"

namespace fdid::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code(ErrorKind k) noexcept {
    switch (k) {
        case ErrorKind::Config:
        case ErrorKind::Domain:
        case ErrorKind::NotFound:
        case ErrorKind::InvalidKernel:
        case ErrorKind::InvalidSupplyRate:
        case ErrorKind::InvalidWeight: return 2;
        case ErrorKind::Parse:
        case ErrorKind::Index:
        case ErrorKind::UndefinedMetric: return 3;
        case ErrorKind::Singular:
        case ErrorKind::NonConvergence:
        case ErrorKind::Numeric:
        case ErrorKind::Infeasible:
        case ErrorKind::Resource: return 4;
    }
    return 4;
}

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

Axis parse_axis(const std::string& s) {
    if (s == "discrete") return Axis::Discrete;
    if (s == "continuous") return Axis::Continuous;
    config_error(fmt::format("unknown axis '{}'", s));
}

fs::path default_input_path(const fs::path& data) {
    fs::path p = data;
    p.replace_filename(data.stem().string() + "_input.csv");
    return p;
}

struct DataOpts {
    std::string data;
    std::string input;
    std::string axis = "discrete";

    void add(CLI::App* c) {
        c->add_option("--data", data, "dataset CSV (t,u,y)")->required();
        c->add_option("--input", input, "continuous input CSV (s,xi); default <data stem>_input.csv");
        c->add_option("--axis", axis, "discrete or continuous")->capture_default_str();
    }

    Dataset load() const {
        if (!fs::exists(data)) throw Error(ErrorKind::NotFound, fmt::format("dataset not found: {}", data));
        const Axis ax = parse_axis(axis);
        if (ax == Axis::Discrete) return load_dataset(data, ax);
        const fs::path in = input.empty() ? default_input_path(data) : fs::path(input);
        if (!fs::exists(in)) throw Error(ErrorKind::NotFound, fmt::format("dataset not found: input file {}", in.string()));
        return load_dataset(data, ax, in);
    }
};

struct KernelOpts {
    std::optional<double> alpha;
    std::optional<double> beta;
    double gamma = 1.0;

    void add(CLI::App* c) {
        c->add_option("--alpha", alpha, "discrete TC decay alpha in [0,1) (default 0.8)");
        c->add_option("--beta", beta, "TC decay rate beta > 0 (default 1 on the continuous axis)");
        c->add_option("--gamma", gamma, "kernel scale")->capture_default_str();
    }

    KernelSpec spec(Axis axis) const {
        if (alpha && beta) config_error("give either --alpha or --beta, not both");
        if (axis == Axis::Discrete) return KernelSpec::discrete(beta ? std::exp(-*beta) : alpha.value_or(0.8), gamma);
        if (alpha) {
            if (!(*alpha > 0.0 && *alpha < 1.0)) config_error("--alpha must lie in (0,1) on the continuous axis");
            return KernelSpec::continuous(-std::log(*alpha), gamma);
        }
        return KernelSpec::continuous(beta.value_or(1.0), gamma);
    }
};

struct PartitionOpts {
    std::optional<double> omega_max;
    std::optional<double> mesh;
    std::optional<std::size_t> n_intervals;
    std::size_t max_intervals = 20000;

    void add(CLI::App* c) {
        c->add_option("--omega-max", omega_max, "upper partition frequency (default pi, or the tail bound)");
        c->add_option("--mesh", mesh, "partition mesh");
        c->add_option("--n-intervals", n_intervals, "number of partition intervals n_P");
        c->add_option("--max-intervals", max_intervals, "cap for the default certified partition")->capture_default_str();
    }

    FrequencyPartition make(const KernelSpec& spec, const std::vector<double>& y, double lambda, double eps,
                            std::vector<std::string>& warnings) const {
        if (mesh && n_intervals) config_error("give either --mesh or --n-intervals, not both");
        const double wmax = omega_max ? *omega_max
                            : spec.axis == Axis::Discrete ? std::numbers::pi
                                                          : omega_max_ct(spec, y, lambda);
        if (n_intervals) return uniform_partition(wmax, *n_intervals);
        if (mesh) return build_partition(wmax, *mesh);
        const double bound = mesh_bound(spec, y, lambda, eps);
        const double needed = std::isfinite(bound) ? std::ceil(wmax / bound) : 1.0;
        if (needed <= static_cast<double>(max_intervals)) return build_partition(wmax, bound);
        warnings.push_back(fmt::format("certified mesh {:.3g} needs {:.3g} intervals; using {} (raise --max-intervals)",
                                       bound, needed, max_intervals));
        return uniform_partition(wmax, max_intervals);
    }
};

struct SolverOpts {
    SolverConfig cfg;
    double jitter = 1e-10;
    double tol = 1e-12;

    void add(CLI::App* c) {
        c->add_option("--theta0", cfg.theta0)->capture_default_str();
        c->add_option("--theta-decay", cfg.theta_decay)->capture_default_str();
        c->add_option("--barrier-tol", cfg.barrier_tol)->capture_default_str();
        c->add_option("--newton-tol", cfg.newton_tol)->capture_default_str();
        c->add_option("--max-newton", cfg.max_newton)->capture_default_str();
        c->add_option("--jitter", jitter, "relative eigenvalue cutoff for the Gram matrix")->capture_default_str();
        c->add_option("--tol", tol, "series truncation tolerance")->capture_default_str();
    }

    IdentifyOptions identify_options(double rho) const {
        cfg.validate();
        IdentifyOptions o;
        o.rho = rho;
        o.tol = tol;
        o.assemble.jitter = jitter;
        return o;
    }
};

RationalTF named_system(const std::string& name) {
    if (name == "example1") return example1_system();
    if (name == "example3") return example3_system();
    config_error(fmt::format("unknown system '{}' (use example1, example3 or custom)", name));
}

struct ReduceOpts {
    std::vector<double> supply;
    std::vector<double> ref_num, ref_den;
    std::string ref_system;
    std::vector<double> w_num, w_den;
    std::size_t weight_horizon = 0;

    void add(CLI::App* c) {
        c->add_option("--supply", supply, "dissipativity supply rate q_u,q_uy,q_y")->delimiter(',')->expected(3);
        c->add_option("--reference-system", ref_system, "reference model example1|example3 (error bound mode)");
        c->add_option("--reference-num", ref_num, "reference numerator, descending powers")->delimiter(',');
        c->add_option("--reference-den", ref_den, "reference denominator, descending powers")->delimiter(',');
        c->add_option("--weight-num", w_num, "weight numerator in z, descending powers")->delimiter(',');
        c->add_option("--weight-den", w_den, "weight denominator in z, descending powers")->delimiter(',');
        c->add_option("--weight-horizon", weight_horizon, "impulse samples of the back-mapped model (default 4n)");
    }
};

struct Prepared {
    Dataset data;
    std::string mode = "hinf";
    std::optional<DissipativityMap> diss;
    std::optional<WeightedMap> weight;
    std::optional<RationalTF> reference;

    void back_map(Model& m) const {
        if (diss) diss->apply(m);
        if (weight) weight->apply(m);
        if (reference) m.reference = reference;
    }
};

Prepared prepare(const Dataset& d, const ReduceOpts& r, double rho) {
    const bool has_ref = !r.ref_system.empty() || !r.ref_num.empty() || !r.ref_den.empty();
    const bool has_w = !r.w_num.empty() || !r.w_den.empty();
    const int modes = int(!r.supply.empty()) + int(has_ref) + int(has_w);
    if (modes > 1) config_error("choose at most one of --supply, --reference-*, --weight-*");
    Prepared p;
    if (!r.supply.empty()) {
        if (rho != 1.0) config_error("--rho is part of the supply rate; leave it at 1 with --supply");
        auto red = dissipativity_reduce(d, {r.supply[0], r.supply[1], r.supply[2]});
        p.data = std::move(red.data);
        p.diss = red.map;
        p.mode = "dissipativity";
    } else if (has_ref) {
        RationalTF g;
        if (!r.ref_system.empty()) {
            if (!r.ref_num.empty() || !r.ref_den.empty()) config_error("give --reference-system or --reference-num/den");
            g = named_system(r.ref_system);
        } else {
            if (r.ref_num.empty() || r.ref_den.empty()) config_error("--reference-num and --reference-den go together");
            g = RationalTF::make(d.axis, r.ref_num, r.ref_den);
        }
        if (g.axis != d.axis) config_error("reference system and dataset are on different axes");
        p.data = delta_reduce(d, g);
        p.reference = g;
        p.mode = "reference";
    } else if (has_w) {
        if (r.w_num.empty() || r.w_den.empty()) config_error("--weight-num and --weight-den go together");
        auto red = weighted_reduce(d, RationalTF::make(Axis::Discrete, r.w_num, r.w_den), r.weight_horizon);
        p.data = std::move(red.data);
        p.weight = red.map;
        p.mode = "weighted";
    } else {
        p.data = d;
    }
    return p;
}

struct TruthOpts {
    std::string system;
    std::vector<double> num, den;

    void add(CLI::App* c) {
        c->add_option("--truth-system", system, "true system example1|example3 for the fit metric");
        c->add_option("--truth-num", num, "true numerator, descending powers")->delimiter(',');
        c->add_option("--truth-den", den, "true denominator, descending powers")->delimiter(',');
    }

    std::optional<RationalTF> get(Axis axis) const {
        if (!system.empty()) {
            RationalTF g = named_system(system);
            if (g.axis != axis) config_error("truth system and dataset are on different axes");
            return g;
        }
        if (num.empty() && den.empty()) return std::nullopt;
        if (num.empty() || den.empty()) config_error("--truth-num and --truth-den go together");
        return RationalTF::make(axis, num, den);
    }
};

struct OutputOpts {
    std::string dir = "fdid_out";
    std::optional<double> horizon;
    std::size_t points = 501;
    bool gnuplot = false;

    void add(CLI::App* c) {
        c->add_option("--out-dir", dir, "directory for model.json, freq.csv, impulse.csv, report.json")
            ->capture_default_str();
        c->add_option("--impulse-horizon", horizon, "impulse response horizon (samples or time)");
        c->add_option("--impulse-points", points, "continuous impulse grid points")->capture_default_str();
        c->add_flag("--gnuplot", gnuplot, "also write plot.gp");
    }

    std::vector<double> impulse_grid(Axis axis, double default_horizon) const {
        const double h = horizon.value_or(default_horizon);
        if (!(h > 0.0)) config_error("impulse horizon must be positive");
        std::vector<double> t;
        if (axis == Axis::Discrete) {
            for (long long k = 0; k < static_cast<long long>(std::ceil(h)); ++k) t.push_back(static_cast<double>(k));
        } else {
            if (points < 2) config_error("--impulse-points must be at least 2");
            for (std::size_t k = 0; k < points; ++k) t.push_back(h * static_cast<double>(k) / static_cast<double>(points - 1));
        }
        return t;
    }
};

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::NotFound, fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw Error(ErrorKind::NotFound, fmt::format("cannot write {}", p.string()));
    return f;
}

void write_freq_csv(const fs::path& p, const std::vector<double>& omegas, const Eigen::VectorXcd& g) {
    auto f = open_out(p);
    f << "omega,re,im,mag\n";
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        const cplx z = g(static_cast<Eigen::Index>(i));
        f << exact_string(omegas[i]) << ',' << exact_string(z.real()) << ',' << exact_string(z.imag()) << ','
          << exact_string(std::abs(z)) << '\n';
    }
}

void write_impulse_csv(const fs::path& p, const std::vector<double>& t, const std::vector<double>& g) {
    auto f = open_out(p);
    f << "t,g\n";
    for (std::size_t i = 0; i < t.size(); ++i) f << exact_string(t[i]) << ',' << exact_string(g[i]) << '\n';
}

void write_gnuplot(const fs::path& dir, Axis axis) {
    auto f = open_out(dir / "plot.gp");
    f << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set multiplot layout 2,1\n"
      << "set title 'Frequency response magnitude'\nset xlabel 'omega'\n"
      << "plot 'freq.csv' using 1:4 with lines\n"
      << "set title 'Impulse response'\nset xlabel 't'\n"
      << "plot 'impulse.csv' using 1:2 with " << (axis == Axis::Discrete ? "impulses" : "lines") << "\n"
      << "unset multiplot\n";
}

// Frequency grid, H-infinity check, impulse response and fit for a model;
// shared by identify and evaluate.
json evaluate_model(const Model& normalized, const Model& m, const FrequencyPartition& grid,
                    const std::vector<double>& ts, const std::optional<RationalTF>& truth, const fs::path& dir,
                    bool gnuplot) {
    // normalized and m share descriptors and coefficients
    const Eigen::VectorXcd F = constraint_response(normalized, grid.omegas);
    const HinfCheck h = hinf_grid_sup(normalized, grid, F);
    const Eigen::VectorXcd G = frequency_response(m, grid.omegas, F);
    const std::vector<double> g = impulse_response(m, ts);
    write_freq_csv(dir / "freq.csv", grid.omegas, G);
    write_impulse_csv(dir / "impulse.csv", ts, g);
    if (gnuplot) write_gnuplot(dir, m.axis());
    json r;
    r["hinf_sup"] = h.grid_sup;
    r["hinf_argmax"] = h.argmax;
    r["certified_sup"] = h.certified_sup;
    r["gain_sup"] = G.size() ? G.cwiseAbs().maxCoeff() : 0.0;
    r["grid_points"] = grid.omegas.size();
    r["grid_mesh"] = grid.mesh;
    if (truth) r["fit"] = fit(g, impulse_response_of(*truth, ts));
    return r;
}

json kernel_json(const KernelSpec& k) {
    return {{"axis", to_string(k.axis)}, {"alpha", k.alpha}, {"beta", k.beta}, {"gamma", k.gamma}};
}

void finish(const json& report, const fs::path& dir, std::ostream& out) {
    auto f = open_out(dir / "report.json");
    f << report.dump(2) << '\n';
    out << report.dump(2) << '\n';
}

double parse_snr(const std::string& s) {
    try {
        return parse_exact(s);
    } catch (const Error&) {
        config_error(fmt::format("invalid --snr '{}'", s));
    }
}

void check_params(double lambda, double eps, double rho) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) config_error(fmt::format("--lambda must be positive, got {}", lambda));
    if (!(eps > 0.0 && eps < 1.0)) config_error(fmt::format("--eps must lie in (0,1), got {}", eps));
    if (!(rho > 0.0) || !std::isfinite(rho)) config_error(fmt::format("--rho must be positive, got {}", rho));
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Kernel-based impulse-response identification with frequency-domain side-information", "fdid"};
    app.set_config("--config", "", "TOML config file; command-line flags override it");
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a dataset from a built-in or custom system");
    std::string sys_name, sim_out, sim_input_out, sim_truth_out, snr_text = "inf", sim_axis = "discrete";
    std::vector<double> sim_num, sim_den;
    std::size_t sim_n = 150;
    double sim_ts = 0.04, min_hold = 0.1, max_hold = 0.6;
    std::uint64_t sim_seed = 0;
    sim->add_option("system", sys_name, "example1, example3 or custom")->required();
    sim->add_option("--out", sim_out, "dataset CSV")->required();
    sim->add_option("--input-out", sim_input_out, "continuous input CSV (default <out stem>_input.csv)");
    sim->add_option("--truth-out", sim_truth_out, "write the true impulse response (t,g)");
    sim->add_option("--n", sim_n, "number of samples")->capture_default_str();
    sim->add_option("--ts", sim_ts, "continuous sampling period (jittered)")->capture_default_str();
    sim->add_option("--snr", snr_text, "output SNR in dB, or inf")->capture_default_str();
    sim->add_option("--seed", sim_seed, "seed for input, jitter and noise")->capture_default_str();
    sim->add_option("--min-hold", min_hold, "continuous input minimum hold time")->capture_default_str();
    sim->add_option("--max-hold", max_hold, "continuous input maximum hold time")->capture_default_str();
    sim->add_option("--axis", sim_axis, "axis of a custom system")->capture_default_str();
    sim->add_option("--num", sim_num, "custom numerator, descending powers")->delimiter(',');
    sim->add_option("--den", sim_den, "custom denominator, descending powers")->delimiter(',');

    // identify
    auto* idc = app.add_subcommand("identify", "identify an impulse response under a frequency-domain bound");
    DataOpts id_data;
    KernelOpts id_kernel;
    PartitionOpts id_part;
    SolverOpts id_solver;
    ReduceOpts id_reduce;
    TruthOpts id_truth;
    OutputOpts id_out;
    double id_lambda = 0.0, id_eps = 1e-3, id_rho = 1.0;
    id_data.add(idc);
    id_kernel.add(idc);
    idc->add_option("--lambda", id_lambda, "regularization weight")->required();
    idc->add_option("--eps", id_eps, "constraint margin in (0,1)")->capture_default_str();
    idc->add_option("--rho", id_rho, "H-infinity bound")->capture_default_str();
    id_part.add(idc);
    id_solver.add(idc);
    id_reduce.add(idc);
    id_truth.add(idc);
    id_out.add(idc);

    // tune
    auto* tc = app.add_subcommand("tune", "grid search over lambda and the kernel decay");
    DataOpts tu_data;
    KernelOpts tu_kernel;
    SolverOpts tu_solver;
    ReduceOpts tu_reduce;
    TuneConfig tu_cfg;
    std::optional<double> tu_omega_max;
    std::size_t tu_intervals = 314;
    double tu_eps = 1e-3, tu_rho = 1.0;
    std::string tu_dir = "fdid_out";
    tu_data.add(tc);
    tc->add_option("--gamma", tu_kernel.gamma, "kernel scale")->capture_default_str();
    tc->add_option("--lambdas", tu_cfg.lambdas, "lambda grid (default 8 points in 1e-4..1e2)")->delimiter(',');
    tc->add_option("--decays", tu_cfg.decays, "alpha or beta grid")->delimiter(',');
    tc->add_option("--train-count", tu_cfg.train_count, "first rows used for training");
    tc->add_option("--train-fraction", tu_cfg.train_fraction, "training fraction when --train-count is 0")
        ->capture_default_str();
    tc->add_option("--random-points", tu_cfg.random_points, "extra seeded random candidates")->capture_default_str();
    tc->add_option("--seed", tu_cfg.seed)->capture_default_str();
    tc->add_option("--eps", tu_eps)->capture_default_str();
    tc->add_option("--rho", tu_rho)->capture_default_str();
    tc->add_option("--omega-max", tu_omega_max, "partition upper frequency (default pi, or the tail bound)");
    tc->add_option("--n-intervals", tu_intervals, "partition intervals")->capture_default_str();
    tc->add_option("--out-dir", tu_dir, "directory for tune.csv and best.json")->capture_default_str();
    tu_solver.add(tc);
    tu_reduce.add(tc);

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "frequency response, impulse response and fit of a saved model");
    std::string ev_model;
    std::optional<double> ev_omega_max;
    std::size_t ev_grid = 10000;
    TruthOpts ev_truth;
    OutputOpts ev_out;
    ev->add_option("--model", ev_model, "model JSON")->required();
    ev->add_option("--omega-max", ev_omega_max, "grid upper frequency (default pi, or the model's omega_max)");
    ev->add_option("--n-grid", ev_grid, "grid intervals")->capture_default_str();
    ev_truth.add(ev);
    ev_out.add(ev);

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            if (e.get_exit_code() == 0) return app.exit(e, out, err);
            json j = {{"error", {{"kind", "usage"}, {"message", e.what()}, {"exit_code", 2}}}};
            err << j.dump() << '\n';
            return 2;
        }

        if (*sim) {
            const double snr = parse_snr(snr_text);
            RationalTF tf;
            if (sys_name == "custom") {
                if (sim_num.empty() || sim_den.empty()) config_error("custom system needs --num and --den");
                tf = RationalTF::make(parse_axis(sim_axis), sim_num, sim_den);
            } else {
                tf = named_system(sys_name);
            }
            if (sim_n == 0) config_error("--n must be positive");
            Dataset d;
            d.axis = tf.axis;
            if (tf.axis == Axis::Discrete) {
                const auto u = white_gaussian_input(sim_n, sim_seed);
                d.input = u;
                for (std::size_t t = 0; t < sim_n; ++t) d.sample_times.push_back(static_cast<double>(t));
            } else {
                d.sample_times = jittered_times(sim_n, sim_ts, sim_seed);
                d.input = random_switching_input(d.sample_times.back(), min_hold, max_hold, sim_seed + 17);
            }
            const SimResult s = simulate(tf, d.input, d.sample_times);
            d.outputs = add_noise_snr(s.y, snr, sim_seed + 1000003);
            const fs::path outp(sim_out);
            if (outp.has_parent_path()) ensure_dir(outp.parent_path());
            if (tf.axis == Axis::Discrete) {
                save_dataset(d, outp);
            } else {
                save_dataset(d, outp, sim_input_out.empty() ? default_input_path(outp) : fs::path(sim_input_out));
            }
            if (!sim_truth_out.empty()) {
                std::vector<double> t;
                const double horizon = tf.axis == Axis::Discrete ? static_cast<double>(sim_n) : d.sample_times.back();
                const std::size_t n = tf.axis == Axis::Discrete ? sim_n : 501;
                for (std::size_t k = 0; k < n; ++k)
                    t.push_back(tf.axis == Axis::Discrete ? static_cast<double>(k)
                                                          : horizon * static_cast<double>(k) / static_cast<double>(n - 1));
                write_impulse_csv(sim_truth_out, t, impulse_response_of(tf, t));
            }
            json r = {{"command", "simulate"}, {"rows", d.size()}, {"unstable", s.unstable}, {"out", sim_out}};
            out << r.dump(2) << '\n';
            return 0;
        }

        if (*idc) {
            check_params(id_lambda, id_eps, id_rho);
            const Dataset raw = id_data.load();
            const KernelSpec spec = id_kernel.spec(raw.axis);
            const IdentifyOptions io = id_solver.identify_options(id_rho);
            const auto truth = id_truth.get(raw.axis);
            const Prepared prep = prepare(raw, id_reduce, id_rho);
            std::vector<double> y = prep.data.outputs;
            for (double& v : y) v /= id_rho;
            std::vector<std::string> warnings;
            const FrequencyPartition p = id_part.make(spec, y, id_lambda, id_eps, warnings);

            const auto t0 = std::chrono::steady_clock::now();
            const Model normalized = identify(prep.data, spec, p, id_lambda, id_eps, id_solver.cfg, io);
            const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            Model m = normalized;
            prep.back_map(m);
            warnings.insert(warnings.end(), m.warnings.begin(), m.warnings.end());

            const fs::path dir(id_out.dir);
            ensure_dir(dir);
            save_model(m, dir / "model.json");
            const FrequencyPartition fine = p.omega_max() > 0.0 ? uniform_partition(p.omega_max(), 10 * p.n_intervals())
                                                                 : uniform_partition(0.0, 0);
            const double default_h = raw.axis == Axis::Discrete
                                         ? static_cast<double>(prep.weight ? prep.weight->horizon : raw.size())
                                         : raw.sample_times.back();
            json r = evaluate_model(normalized, m, fine, id_out.impulse_grid(raw.axis, default_h), truth, dir,
                                    id_out.gnuplot);
            r["command"] = "identify";
            r["mode"] = prep.mode;
            r["kernel"] = kernel_json(spec);
            r["lambda"] = id_lambda;
            r["eps"] = id_eps;
            r["rho"] = id_rho;
            r["n_intervals"] = p.n_intervals();
            r["omega_max_partition"] = p.omega_max();
            r["mesh"] = m.mesh;
            r["mesh_bound"] = m.mesh_bound;
            r["omega_max"] = m.omega_max;
            r["certified"] = m.certified;
            r["iterations"] = m.iterations();
            r["active"] = m.active.size();
            r["objective"] = m.report.objective;
            r["rkhs_norm_sq"] = m.rkhs_norm_sq();
            r["duality_gap"] = m.report.duality_gap;
            r["feedthrough"] = m.feedthrough;
            if (prep.weight) r["weight_inverse_pole_radius"] = prep.weight->pole_radius;
            r["timing_s"] = elapsed;
            r["warnings"] = warnings;
            finish(r, dir, out);
            return 0;
        }

        if (*tc) {
            check_params(1.0, tu_eps, tu_rho);
            const Dataset raw = tu_data.load();
            const KernelSpec base = tu_kernel.spec(raw.axis);
            const IdentifyOptions io = tu_solver.identify_options(tu_rho);
            const Prepared prep = prepare(raw, tu_reduce, tu_rho);
            if (tu_cfg.lambdas.empty()) tu_cfg.lambdas = default_lambda_grid();
            if (tu_cfg.decays.empty()) tu_cfg.decays = default_decay_grid(raw.axis);
            double wmax = std::numbers::pi;
            if (tu_omega_max) {
                wmax = *tu_omega_max;
            } else if (raw.axis == Axis::Continuous) {
                // Widest tail bound over the grid: smallest lambda and decay.
                std::vector<double> y = prep.data.outputs;
                for (double& v : y) v /= tu_rho;
                const double lmin = *std::min_element(tu_cfg.lambdas.begin(), tu_cfg.lambdas.end());
                const double dmin = *std::min_element(tu_cfg.decays.begin(), tu_cfg.decays.end());
                wmax = omega_max_ct(KernelSpec::continuous(dmin, base.gamma), y, lmin);
            }
            const FrequencyPartition p = uniform_partition(wmax, tu_intervals);
            const TuneResult res = tune(prep.data, base, p, tu_eps, tu_cfg, tu_solver.cfg, io);
            const fs::path dir(tu_dir);
            ensure_dir(dir);
            write_tune_table(res, dir / "tune.csv");
            json best = {{"command", "tune"},
                         {"lambda", res.best.lambda},
                         {"decay", res.best.decay},
                         {"decay_name", raw.axis == Axis::Discrete ? "alpha" : "beta"},
                         {"v", res.best_v},
                         {"candidates", res.table.size()},
                         {"mode", prep.mode}};
            auto f = open_out(dir / "best.json");
            f << best.dump(2) << '\n';
            out << best.dump(2) << '\n';
            return 0;
        }

        if (*ev) {
            const Model m = load_model(ev_model);
            Model normalized = m;
            normalized.post_filter.reset();
            normalized.reference.reset();
            const double wmax = ev_omega_max ? *ev_omega_max
                                : m.axis() == Axis::Discrete ? std::numbers::pi
                                : m.omega_max > 0.0          ? m.omega_max
                                                             : 10.0;
            const FrequencyPartition grid = uniform_partition(wmax, ev_grid);
            const Dataset& d = m.ctx->dataset();
            const double default_h = m.axis() == Axis::Discrete ? static_cast<double>(d.size()) : d.sample_times.back();
            const fs::path dir(ev_out.dir);
            ensure_dir(dir);
            json r = evaluate_model(normalized, m, grid, ev_out.impulse_grid(m.axis(), default_h), ev_truth.get(m.axis()),
                                    dir, ev_out.gnuplot);
            r["command"] = "evaluate";
            r["certified"] = m.certified;
            r["kernel"] = kernel_json(m.spec);
            finish(r, dir, out);
            return 0;
        }
        return 2;
    } catch (const Error& e) {
        const int code = exit_code(e.kind());
        json j = {{"error", {{"kind", to_string(e.kind())}, {"message", e.what()}, {"exit_code", code}}}};
        err << j.dump() << '\n';
        return code;
    } catch (const std::exception& e) {
        json j = {{"error", {{"kind", "internal"}, {"message", e.what()}, {"exit_code", 4}}}};
        err << j.dump() << '\n';
        return 4;
    }
}

}  // namespace fdid::cli
