#pragma once

// Reference LTI simulators, ground-truth impulse responses and seeded noise.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "fdid/kernels.hpp"
#include "fdid/signals.hpp"

namespace fdid {

// G = num/den with coefficients in descending powers of z (discrete) or s
// (continuous). Only proper transfer functions are accepted.
struct RationalTF {
    Axis axis = Axis::Discrete;
    std::vector<double> num;
    std::vector<double> den;

    // Strips leading zeros and validates; throws Domain on a zero denominator
    // or an improper ratio.
    static RationalTF make(Axis axis, std::vector<double> num, std::vector<double> den);

    int order() const noexcept { return static_cast<int>(den.size()) - 1; }
    std::vector<std::complex<double>> poles() const;
    std::vector<std::complex<double>> zeros() const;
    bool is_stable() const;
    // Direct feedthrough G(inf).
    double feedthrough() const;

    std::complex<double> eval(std::complex<double> z) const;
    // G(e^{jw}) or G(jw).
    std::complex<double> frequency_response(double omega) const;
};

RationalTF operator+(const RationalTF& a, const RationalTF& b);
RationalTF operator*(const RationalTF& a, const RationalTF& b);

// 1/(2z-1) + 0.03(z-1)/(z^2+z+0.9).
RationalTF example1_system();
// -(2s^3+3.6s^2+2.095s+0.396)/(0.461s^4+2.628s^3+4.389s^2+2.662s+0.519).
RationalTF example3_system();

// Controllable canonical realization x' = Ax + Bu, y = Cx + Du (or the
// shift-form analogue on the discrete axis).
struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;
    double D = 0.0;
};
StateSpace realize(const RationalTF& tf);

struct SimResult {
    std::vector<double> y;
    bool unstable = false;
};

// Noise-free response from rest, sampled at `times` (integers on the
// discrete axis). Continuous inputs are propagated exactly across each
// constant segment with the matrix exponential of the augmented (A, B) pair.
SimResult simulate(const RationalTF& tf, const Input& u, const std::vector<double>& times);

// Runs the difference equation of a discrete `tf` on x_0, x_1, ... from rest.
std::vector<double> filter_signal(const RationalTF& tf, const std::vector<double>& x);

// Impulse response samples. On the continuous axis this is the regular part
// C e^{At} B; the Dirac part D is available from feedthrough().
std::vector<double> impulse_response_of(const RationalTF& tf, const std::vector<double>& grid);

// mt19937_64 with 53-bit uniforms and the Marsaglia polar method for
// normals. Implemented here rather than with <random> distributions, whose
// algorithms differ between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform();  // [0, 1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

// y + w with w i.i.d. N(0, var(y) 10^(-snr_db/10)). snr_db = +inf leaves y
// unchanged.
std::vector<double> add_noise_snr(const std::vector<double>& y, double snr_db, std::uint64_t seed);

// Input generators used by the experiments.
DiscreteInput white_gaussian_input(std::size_t n, std::uint64_t seed);
// Levels +-1 with i.i.d. hold times in [min_hold, max_hold), covering [0, t_end].
PiecewiseConstantInput random_switching_input(double t_end, double min_hold, double max_hold,
                                              std::uint64_t seed);
// t_k = k*ts + U[0, ts) for k = 0..n-1.
std::vector<double> jittered_times(std::size_t n, double ts, std::uint64_t seed);

}  // namespace fdid
