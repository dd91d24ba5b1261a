#pragma once

// Dataset transforms that turn dissipativity, reference-model and weighted
// side-information into the unit-gain problem, and the maps that carry the
// identified model back.

#include <cstddef>
#include <functional>
#include <vector>

#include "fdid/identify.hpp"
#include "fdid/signals.hpp"
#include "fdid/sim.hpp"

namespace fdid {

// s(u,y) = q_u u^2 + 2 q_uy u y + q_y y^2.
struct SupplyRate {
    double q_u = 1.0;
    double q_uy = 0.0;
    double q_y = -1.0;

    double det() const noexcept { return q_u * q_y - q_uy * q_uy; }
    // Throws InvalidSupplyRate unless q_y < 0 and det <= 0.
    void validate() const;
};

// Q = [l1 l2; 0 l3] diag(1, -1) [l1 0; l2 l3].
struct SupplyFactors {
    double l1 = 1.0;
    double l2 = 0.0;
    double l3 = 1.0;
};
SupplyFactors factorize(const SupplyRate& q);

// G = (l1 G~ - l2) / l3 for G~ identified from (v, z) = (l1 u, l2 u + l3 y).
struct DissipativityMap {
    SupplyFactors f;
    void apply(Model& m) const;
};

struct DissipativityReduction {
    Dataset data;
    DissipativityMap map;
};
DissipativityReduction dissipativity_reduce(const Dataset& d, const SupplyRate& q);

// d_t = y_t - L_{u,t}(gbar). The transfer-function overload simulates gbar
// exactly; the function overload sums (discrete) or integrates (continuous,
// adaptive Gauss-Kronrod per input segment) the convolution and adds
// feedthrough * u(t).
Dataset delta_reduce(const Dataset& d, const RationalTF& gbar);
Dataset delta_reduce(const Dataset& d, const std::function<double(double)>& gbar, double feedthrough = 0.0,
                     double tol = 1e-12);

// G = W^{-1} H for H identified from the outputs filtered through W.
struct WeightedMap {
    RationalTF inverse;
    std::size_t horizon = 0;   // samples of G produced by impulse()
    double pole_radius = 0.0;  // largest pole modulus of W^{-1}
    void apply(Model& m) const;
    std::vector<double> impulse(const Model& m) const;
};

struct WeightedReduction {
    Dataset data;
    WeightedMap map;
};
// Discrete datasets sampled at t = 0..n-1 only. W must be biproper with all
// poles and zeros strictly inside the unit circle (InvalidWeight otherwise).
// horizon = 0 selects 4 n.
WeightedReduction weighted_reduce(const Dataset& d, const RationalTF& w, std::size_t horizon = 0);

}  // namespace fdid
