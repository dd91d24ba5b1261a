#include "fdid/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "fdid/error.hpp"
#include "fdid/model_io.hpp"
#include "fdid/sim.hpp"

namespace fdid {

namespace {

std::vector<double> logspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    return v;
}

KernelSpec with_theta(const KernelSpec& base, double decay) {
    return base.axis == Axis::Discrete ? KernelSpec::discrete(decay, base.gamma) : KernelSpec::continuous(decay, base.gamma);
}

// Fits every lambda for one decay, sharing the Gram context and the cached
// input blocks.
void evaluate_decay(const Dataset& d, const Split& split, const KernelSpec& base, double decay,
                    const std::vector<double>& lambdas, const FrequencyPartition& p, double eps,
                    const SolverConfig& cfg, const IdentifyOptions& opts, std::vector<TuneRow>& out) {
    std::unique_ptr<Identifier> id;
    std::string setup_error;
    try {
        auto ctx = std::make_shared<const GramContext>(d, with_theta(base, decay), opts.tol, opts.discrete_sum);
        id = std::make_unique<Identifier>(ctx, p, split.train, opts.rho, opts.assemble);
    } catch (const Error& e) {
        setup_error = e.what();
    }
    for (double lambda : lambdas) {
        TuneRow row{lambda, decay, std::numeric_limits<double>::quiet_NaN(), setup_error};
        if (id) {
            try {
                row.v = validation_error(id->solve(lambda, eps, cfg), d, split.validation);
            } catch (const Error& e) {
                row.error = e.what();
            }
        }
        out.push_back(std::move(row));
    }
}

}  // namespace

Split make_split(const TuneConfig& cfg, std::size_t n) {
    Split s;
    if (!cfg.train.empty() || !cfg.validation.empty()) {
        s.train = cfg.train;
        s.validation = cfg.validation;
        std::vector<int> seen(n, 0);
        for (const auto* side : {&s.train, &s.validation})
            for (std::size_t i : *side) {
                if (i >= n) throw Error(ErrorKind::Config, fmt::format("split index {} out of range", i));
                if (seen[i]++) throw Error(ErrorKind::Config, fmt::format("split index {} appears twice", i));
            }
        if (std::find(seen.begin(), seen.end(), 0) != seen.end())
            throw Error(ErrorKind::Config, "split does not cover the dataset");
    } else {
        std::size_t k = cfg.train_count;
        if (k == 0) {
            if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
                throw Error(ErrorKind::Config, "train_fraction must lie in (0, 1)");
            k = static_cast<std::size_t>(std::llround(cfg.train_fraction * static_cast<double>(n)));
        }
        for (std::size_t i = 0; i < n; ++i) (i < k ? s.train : s.validation).push_back(i);
    }
    if (s.train.empty() || s.validation.empty())
        throw Error(ErrorKind::Config, "training and validation sets must both be non-empty");
    return s;
}

std::vector<double> default_lambda_grid() { return logspace(-4.0, 2.0, 8); }

std::vector<double> default_decay_grid(Axis axis) {
    if (axis == Axis::Continuous) return logspace(-1.0, 1.0, 8);
    std::vector<double> v(8);
    for (std::size_t i = 0; i < 8; ++i) v[i] = 0.5 + (0.99 - 0.5) * static_cast<double>(i) / 7.0;
    return v;
}

double validation_error(const Model& m, const Dataset& d, const std::vector<std::size_t>& validation) {
    if (validation.empty()) throw Error(ErrorKind::Config, "empty validation set");
    double s = 0.0;
    for (std::size_t i : validation) {
        if (i >= d.size()) throw Error(ErrorKind::Index, "validation row out of range");
        const double r = d.outputs[i] - predict(m, d.sample_times[i]);
        s += r * r;
    }
    return s / static_cast<double>(validation.size());
}

double validation_error(const Dataset& d, const Split& split, const KernelSpec& base, const Theta& theta,
                        const FrequencyPartition& p, double eps, const SolverConfig& cfg, const IdentifyOptions& opts) {
    try {
        auto ctx = std::make_shared<const GramContext>(d, with_theta(base, theta.decay), opts.tol, opts.discrete_sum);
        const Model m = Identifier(ctx, p, split.train, opts.rho, opts.assemble).solve(theta.lambda, eps, cfg);
        return validation_error(m, d, split.validation);
    } catch (const Error& e) {
        throw Error(e.kind(), fmt::format("lambda={} decay={}: {}", theta.lambda, theta.decay, e.what()));
    }
}

TuneResult tune(const Dataset& d, const KernelSpec& base, const FrequencyPartition& p, double eps,
                const TuneConfig& cfg, const SolverConfig& solver, const IdentifyOptions& opts) {
    const Split split = make_split(cfg, d.size());
    const std::vector<double> lambdas = cfg.lambdas.empty() ? default_lambda_grid() : cfg.lambdas;
    const std::vector<double> decays = cfg.decays.empty() ? default_decay_grid(base.axis) : cfg.decays;

    TuneResult r;
    for (double decay : decays) evaluate_decay(d, split, base, decay, lambdas, p, eps, solver, opts, r.table);

    if (cfg.random_points > 0) {
        const auto [llo, lhi] = std::minmax_element(lambdas.begin(), lambdas.end());
        const auto [dlo, dhi] = std::minmax_element(decays.begin(), decays.end());
        Rng rng(cfg.seed);
        for (std::size_t k = 0; k < cfg.random_points; ++k) {
            const double lambda = std::exp(rng.uniform(std::log(*llo), std::log(*lhi)));
            const double decay = base.axis == Axis::Discrete ? rng.uniform(*dlo, *dhi)
                                                             : std::exp(rng.uniform(std::log(*dlo), std::log(*dhi)));
            evaluate_decay(d, split, base, decay, {lambda}, p, eps, solver, opts, r.table);
        }
    }

    const TuneRow* best = nullptr;
    std::string errors;
    for (const auto& row : r.table) {
        if (std::isnan(row.v)) {
            errors += fmt::format("\n  lambda={} decay={}: {}", row.lambda, row.decay, row.error);
            continue;
        }
        if (!best || row.v < best->v ||
            (row.v == best->v && (row.lambda > best->lambda || (row.lambda == best->lambda && row.decay > best->decay))))
            best = &row;
    }
    if (!best) throw Error(ErrorKind::NonConvergence, "every tuning candidate failed:" + errors);
    r.best = {best->lambda, best->decay};
    r.best_v = best->v;
    return r;
}

void write_tune_table(const TuneResult& r, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::NotFound, fmt::format("cannot write {}", path.string()));
    out << "lambda,decay,v\n";
    for (const auto& row : r.table)
        out << exact_string(row.lambda) << ',' << exact_string(row.decay) << ',' << exact_string(row.v) << '\n';
}

}  // namespace fdid
