#pragma once

// Algebraic inequalities behind the corrector estimates, with seeded
// randomized scans that estimate or certify their constants.
//
//   monotonicity   (x|x|^{p-2} - y|y|^{p-2}).(x - y) >= c |x - y|^p
//                  (x|x|^{p-2} - y|y|^{p-2}).(x - y) >= c (|x|^{p-2} + |y|^{p-2}) |x - y|^2
//   Lipschitz      |x|x|^{p-2} - y|y|^{p-2}| <= C (|x|^{p-2} + |y|^{p-2}) |x - y|
//   Bregman        c (|x|^2|xi|^{p-2} + |x|^p) <= g_xi(x) <= C (...)
//   signed powers  |(x + h)^{1/(p-1)} - x^{1/(p-1)}| <= C |h|^{1/(p-1)}

#include "phom/numerics.hpp"
#include "phom/rng.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace phom {

struct Pairing {
    double lhs = 0.0;             // (x|x|^{p-2} - y|y|^{p-2}).(x - y)
    double p_lower = 0.0;         // |x - y|^p
    double weighted_lower = 0.0;  // (|x|^{p-2} + |y|^{p-2}) |x - y|^2
    double upper = 0.0;           // |x|x|^{p-2} - y|y|^{p-2}|
};

Pairing monotone_pairing(const Vec& x, const Vec& y, double p);

/// |xi + x|^p - |xi|^p - p |xi|^{p-2} xi . x
double g_xi(const Vec& xi, const Vec& x, double p);

/// g_xi(x) / (|x|^2 |xi|^{p-2} + |x|^p), reported twice for min/max aggregation.
/// Throws DegenerateInput when x = 0.
std::pair<double, double> g_xi_bounds_ratio(const Vec& xi, const Vec& x, double p);

/// G_{xi,eta}(X, Y) = |xi + X|^p + |eta + Y|^p - |xi + T|^p - |eta + T|^p
///                    - (p/2)(xi|xi|^{p-2} - eta|eta|^{p-2}).(X - Y),  T = (X + Y)/2.
double big_g(const Vec& xi, const Vec& eta, const Vec& X, const Vec& Y, double p);

/// Correction term multiplying c_p in the lower bound for G: the restricted
/// form for 2 <= p < 3 (uses delta), the global form for p >= 3.
double lower_bound_correction(const Vec& xi, const Vec& eta, const Vec& X, const Vec& Y, double p,
                          double delta);

/// Sampling law shared by the scans: each component is uniform in [-10, 10]
/// with probability 0.8, otherwise standard Cauchy clipped at 1e3.
Vec sample_vector(const CounterRng& rng, std::uint64_t index, std::uint64_t lane, int dim);
int sample_dim(const CounterRng& rng, std::uint64_t index);

inline constexpr double kExponentSet[] = {2.0, 2.5, 3.0, 3.5, 4.0, 5.0};

/// Ratios kept for |x - y| (or |x|, |h|) above this guard.
inline constexpr double kRatioGuard = 1e-9;

struct LowerBoundReport {
    double p = 2.0;
    double delta = 1.0;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    std::string regime;   // "restricted" (2 <= p < 3) or "global" (p >= 3)
    bool feasible = false;
    double gamma = 0.0;   // largest feasible gamma on {2^-k}
    double c = 0.0;       // smallest feasible c on {0} U {2^j}
    std::size_t violations = 0;  // at (gamma, c); zero when feasible
};

/// Searches gamma in {2^-k, k = 0..40} and c in {0} U {2^j, j = -20..20} for
/// G - gamma |X - Y|^p + c K >= -1e-10 scale at every sample. Dimension is
/// drawn from {1, 2, 3} per sample.
LowerBoundReport check_lower_bound_G(double p, double delta, std::size_t samples, std::uint64_t seed,
                               unsigned threads = 0);

struct GxiRange {
    double p = 2.0;
    double c_est = 0.0;  // min of g_xi_bounds_ratio
    double C_est = 0.0;  // max
    double min_g = 0.0;  // most negative g_xi seen
    std::size_t samples = 0;
};

struct RatioStat {
    std::string name;
    bool lower = true;        // the reference constant is a lower bound on the ratio
    std::string reference;    // constant checked against, as a formula in p
    double margin = 0.0;      // min (lower) or max (upper) of ratio / constant
    std::size_t samples = 0;  // ratios formed
    std::size_t violations = 0;
    bool passed() const { return violations == 0; }
};

struct BatteryReport {
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    std::vector<RatioStat> ratios;
    std::vector<LowerBoundReport> lower_bound_G;
    std::vector<GxiRange> bregman;  // empirical constants per exponent
    bool passed() const;
    const GxiRange* bregman_for(double p) const;
};

/// Runs every inequality on `samples` seeded draws with p drawn from
/// kExponentSet (cycling with the index) and d from {1, 2, 3}. The lower
/// bound for G gets samples / 6 draws per exponent.
BatteryReport run_battery(std::size_t samples, std::uint64_t seed, double delta = 1.0,
                          unsigned threads = 0);

/// min/max of g_xi_bounds_ratio at fixed p and dimension.
GxiRange g_xi_ratio_range(double p, int dim, std::size_t samples, std::uint64_t seed,
                          unsigned threads = 0);

}  // namespace phom
