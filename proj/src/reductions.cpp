#include "fdid/reductions.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "fdid/error.hpp"

namespace fdid {

void SupplyRate::validate() const {
    if (!std::isfinite(q_u) || !std::isfinite(q_uy) || !std::isfinite(q_y))
        throw Error(ErrorKind::InvalidSupplyRate, "supply rate entries must be finite");
    if (!(q_y < 0.0)) throw Error(ErrorKind::InvalidSupplyRate, fmt::format("q_y must be negative, got {}", q_y));
    if (det() > 0.0) throw Error(ErrorKind::InvalidSupplyRate, fmt::format("det Q must be <= 0, got {}", det()));
}

SupplyFactors factorize(const SupplyRate& q) {
    q.validate();
    SupplyFactors f;
    f.l3 = std::sqrt(-q.q_y);
    f.l2 = -q.q_uy / f.l3;
    f.l1 = std::sqrt(std::max(0.0, q.det() / q.q_y));
    return f;
}

void DissipativityMap::apply(Model& m) const {
    const double k = f.l1 / f.l3;
    m.gain *= k;
    m.feedthrough = k * m.feedthrough - f.l2 / f.l3;
}

DissipativityReduction dissipativity_reduce(const Dataset& d, const SupplyRate& q) {
    DissipativityReduction r;
    r.map.f = factorize(q);
    const auto& [l1, l2, l3] = r.map.f;
    r.data = d;
    if (d.axis == Axis::Discrete) {
        DiscreteInput v = d.discrete_input();
        for (double& s : v.samples) s *= l1;
        r.data.input = v;
    } else {
        PiecewiseConstantInput v = d.pwc_input();
        for (double& s : v.values) s *= l1;
        r.data.input = v;
    }
    for (std::size_t i = 0; i < d.size(); ++i)
        r.data.outputs[i] = l2 * d.input_at(d.sample_times[i]) + l3 * d.outputs[i];
    return r;
}

Dataset delta_reduce(const Dataset& d, const RationalTF& gbar) {
    if (gbar.axis != d.axis) throw Error(ErrorKind::Domain, "reference system and dataset are on different axes");
    const SimResult s = simulate(gbar, d.input, d.sample_times);
    Dataset out = d;
    for (std::size_t i = 0; i < d.size(); ++i) out.outputs[i] -= s.y[i];
    return out;
}

Dataset delta_reduce(const Dataset& d, const std::function<double(double)>& gbar, double feedthrough, double tol) {
    Dataset out = d;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double t = d.sample_times[i];
        double conv = 0.0;
        if (d.axis == Axis::Discrete) {
            const auto& u = d.discrete_input();
            const auto tt = static_cast<long long>(t);
            for (long long s = 0; s <= tt; ++s) conv += gbar(static_cast<double>(s)) * u.at(tt - s);
        } else {
            // u(t - s) is constant for s in (t - b_{k+1}, t - b_k].
            const auto& u = d.pwc_input();
            for (std::size_t k = 0; k < u.segments(); ++k) {
                const double lo = std::max(0.0, t - u.breakpoints[k + 1]);
                const double hi = std::min(t, t - u.breakpoints[k]);
                if (hi <= lo || u.values[k] == 0.0) continue;
                conv += u.values[k] *
                        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(gbar, lo, hi, 15, tol);
            }
        }
        out.outputs[i] -= conv + feedthrough * d.input_at(t);
    }
    return out;
}

void WeightedMap::apply(Model& m) const {
    if (m.spec.axis != Axis::Discrete) throw Error(ErrorKind::Domain, "weighted back-map needs a discrete model");
    m.post_filter = m.post_filter ? *m.post_filter * inverse : inverse;
}

std::vector<double> WeightedMap::impulse(const Model& m) const {
    Model g = m;
    apply(g);
    std::vector<double> ts(horizon);
    for (std::size_t t = 0; t < horizon; ++t) ts[t] = static_cast<double>(t);
    return impulse_response(g, ts);
}

WeightedReduction weighted_reduce(const Dataset& d, const RationalTF& w, std::size_t horizon) {
    if (d.axis != Axis::Discrete || w.axis != Axis::Discrete)
        throw Error(ErrorKind::Domain, "weighted reduction is defined on the discrete axis only");
    if (w.num.size() != w.den.size())
        throw Error(ErrorKind::InvalidWeight, "weight must be biproper (equal numerator and denominator degree)");
    for (const auto& z : w.zeros())
        if (!(std::abs(z) < 1.0))
            throw Error(ErrorKind::InvalidWeight, fmt::format("weight zero {}{:+}j is not inside the unit circle", z.real(), z.imag()));
    for (const auto& p : w.poles())
        if (!(std::abs(p) < 1.0))
            throw Error(ErrorKind::InvalidWeight, fmt::format("weight pole {}{:+}j is not inside the unit circle", p.real(), p.imag()));
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d.sample_times[i] != static_cast<double>(i))
            throw Error(ErrorKind::Domain, "weighted reduction needs samples at t = 0, 1, ..., n-1");

    WeightedReduction r;
    r.data = d;
    r.data.outputs = filter_signal(w, d.outputs);
    r.map.inverse = RationalTF::make(Axis::Discrete, w.den, w.num);
    r.map.horizon = horizon == 0 ? 4 * d.size() : horizon;
    for (const auto& p : r.map.inverse.poles()) r.map.pole_radius = std::max(r.map.pole_radius, std::abs(p));
    return r;
}

}  // namespace fdid
