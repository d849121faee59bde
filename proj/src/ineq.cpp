#include "phom/ineq.hpp"

#include "phom/errors.hpp"
#include "phom/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace phom {

namespace {

constexpr double kRoundoff = 1e-10;
constexpr std::size_t kChunk = 1 << 15;
constexpr double kInf = std::numeric_limits<double>::infinity();

// z |z|^{p-2}
Vec flux(const Vec& z, double p)
{
    return abs_power(z.norm(), p - 2.0) * z;
}

// (1 + t)^q - 1 - q t for t >= -1, without cancellation for small t.
double bregman_scalar(double t, double q)
{
    if (std::abs(t) < 1e-3) {
        // binomial series from the t^2 term
        double coef = q * (q - 1.0) / 2.0, tk = t * t, s = 0.0;
        for (int k = 2; k <= 8; ++k) {
            s += coef * tk;
            coef *= (q - k) / (k + 1);
            tk *= t;
        }
        return s;
    }
    return std::expm1(q * std::log1p(t)) - q * t;
}

std::size_t chunk_count(std::size_t samples)
{
    return (samples + kChunk - 1) / kChunk;
}

}  // namespace

Pairing monotone_pairing(const Vec& x, const Vec& y, double p)
{
    if (x.size() != y.size())
        throw InvalidArgument("monotone_pairing: dimension mismatch");
    const Vec fx = flux(x, p), fy = flux(y, p);
    const double gap = (x - y).norm();
    Pairing r;
    r.lhs = (fx - fy).dot(x - y);
    r.p_lower = abs_power(gap, p);
    r.weighted_lower = (abs_power(x.norm(), p - 2.0) + abs_power(y.norm(), p - 2.0)) * gap * gap;
    r.upper = (fx - fy).norm();
    return r;
}

double g_xi(const Vec& xi, const Vec& x, double p)
{
    if (xi.size() != x.size())
        throw InvalidArgument("g_xi: dimension mismatch");
    const double a2 = xi.squaredNorm();
    const double x2 = x.squaredNorm();
    if (a2 == 0.0)
        return abs_power(std::sqrt(x2), p);
    // |xi + x|^p - |xi|^p - (p/2)|xi|^{p-2} s = |xi|^p phi(s/|xi|^2), s = |xi + x|^2 - |xi|^2
    const double s = 2.0 * xi.dot(x) + x2;
    const double ap = std::pow(a2, 0.5 * p);
    return ap * bregman_scalar(s / a2, 0.5 * p) + 0.5 * p * std::pow(a2, 0.5 * p - 1.0) * x2;
}

std::pair<double, double> g_xi_bounds_ratio(const Vec& xi, const Vec& x, double p)
{
    const double nx = x.norm();
    if (nx == 0.0)
        throw DegenerateInput("g_xi_bounds_ratio: x = 0");
    const double den = nx * nx * abs_power(xi.norm(), p - 2.0) + abs_power(nx, p);
    const double r = g_xi(xi, x, p) / den;
    return {r, r};
}

double big_g(const Vec& xi, const Vec& eta, const Vec& X, const Vec& Y, double p)
{
    const Vec T = 0.5 * (X + Y);
    return abs_power((xi + X).norm(), p) + abs_power((eta + Y).norm(), p) -
           abs_power((xi + T).norm(), p) - abs_power((eta + T).norm(), p) -
           0.5 * p * (flux(xi, p) - flux(eta, p)).dot(X - Y);
}

double lower_bound_correction(const Vec& xi, const Vec& eta, const Vec& X, const Vec& Y, double p,
                          double delta)
{
    const double d = (xi - eta).norm();
    const double diff = (X - Y).norm();
    const double sum = (X + Y).norm();
    double k = abs_power(d, p - 2.0) * diff;
    if (p < 3.0)
        k += std::pow(delta, p - 3.0) * d * sum;
    else
        k += d * abs_power(sum, p - 2.0) + abs_power(xi.norm() + eta.norm(), p - 3.0) * d * sum;
    return k * diff;
}

Vec sample_vector(const CounterRng& rng, std::uint64_t index, std::uint64_t lane, int dim)
{
    Vec v(dim);
    for (int i = 0; i < dim; ++i) {
        const std::uint64_t base = lane * 8 + 2 * static_cast<std::uint64_t>(i);
        v[i] = rng.uniform(index, base) < 0.8 ? rng.uniform(index, base + 1, -10.0, 10.0)
                                              : rng.clipped_cauchy(index, base + 1, 1e3);
    }
    return v;
}

int sample_dim(const CounterRng& rng, std::uint64_t index)
{
    return 1 + static_cast<int>(rng.bits(index, 1000) % 3);
}

namespace {

struct LowerBoundPartial {
    static constexpr int kGammas = 41;
    std::array<double, kGammas> c_req{};     // max required c per gamma
    std::array<bool, kGammas> blocked{};     // violated with K = 0
    std::array<std::size_t, kGammas> over{};  // violated even at the largest c
};

constexpr double kCmax = 1048576.0;  // 2^20

}  // namespace

LowerBoundReport check_lower_bound_G(double p, double delta, std::size_t samples, std::uint64_t seed,
                               unsigned threads)
{
    if (!(p >= 2.0))
        throw InvalidArgument("check_lower_bound_G: p must be >= 2");
    if (!(delta > 0.0))
        throw InvalidArgument("check_lower_bound_G: delta must be positive");
    const bool restricted = p < 3.0;
    const CounterRng rng(seed);

    auto run_chunk = [&](std::size_t chunk) {
        LowerBoundPartial part;
        part.c_req.fill(-kInf);
        const std::size_t lo = chunk * kChunk, hi = std::min(samples, lo + kChunk);
        for (std::size_t idx = lo; idx < hi; ++idx) {
            const auto i = static_cast<std::uint64_t>(idx);
            const int d = sample_dim(rng, i);
            Vec xi = sample_vector(rng, i, 0, d);
            Vec X = sample_vector(rng, i, 2, d);
            Vec Y = sample_vector(rng, i, 3, d);
            Vec eta = sample_vector(rng, i, 1, d);
            const double mode = rng.uniform(i, 1001);
            if (restricted) {
                const double n = xi.norm();
                if (n < delta) {
                    const Vec dir = n > 0.0 ? Vec(xi / n) : unit_vec(d, 0);
                    xi = delta * (1.0 + rng.uniform(i, 1002)) * dir;
                }
                const double ne = eta.norm();
                const Vec dir = ne > 0.0 ? Vec(eta / ne) : unit_vec(d, 0);
                const double r = 0.5 * delta * std::pow(rng.uniform(i, 1003), 1.0 / d) * (1.0 - 1e-12);
                eta = xi + r * dir;
            }
            if (mode < 0.05)
                eta = xi;
            else if (mode < 0.10)
                Y = X;
            else if (mode < 0.15)
                Y = -X;

            const double G = big_g(xi, eta, X, Y, p);
            const double D = abs_power((X - Y).norm(), p);
            const double K = lower_bound_correction(xi, eta, X, Y, p, delta);
            const Vec T = 0.5 * (X + Y);
            const double scale = abs_power((xi + X).norm(), p) + abs_power((eta + Y).norm(), p) +
                                 abs_power((xi + T).norm(), p) + abs_power((eta + T).norm(), p) +
                                 0.5 * p * (flux(xi, p) - flux(eta, p)).norm() * (X - Y).norm();
            const double guard = kRoundoff * scale;
            double gamma = 1.0;
            for (int k = 0; k < LowerBoundPartial::kGammas; ++k, gamma *= 0.5) {
                const double deficit = gamma * D - G - guard;
                if (deficit <= 0.0)
                    continue;
                if (K <= 0.0) {
                    part.blocked[static_cast<std::size_t>(k)] = true;
                    ++part.over[static_cast<std::size_t>(k)];
                    continue;
                }
                const double need = deficit / K;
                auto& c = part.c_req[static_cast<std::size_t>(k)];
                c = std::max(c, need);
                if (need > kCmax)
                    ++part.over[static_cast<std::size_t>(k)];
            }
        }
        return part;
    };
    const auto parts = parallel_map<LowerBoundPartial>(chunk_count(samples), threads, run_chunk);

    LowerBoundPartial total;
    total.c_req.fill(-kInf);
    for (const auto& part : parts)
        for (std::size_t k = 0; k < total.c_req.size(); ++k) {
            total.c_req[k] = std::max(total.c_req[k], part.c_req[k]);
            total.blocked[k] = total.blocked[k] || part.blocked[k];
            total.over[k] += part.over[k];
        }

    LowerBoundReport rep;
    rep.p = p;
    rep.delta = delta;
    rep.seed = seed;
    rep.samples = samples;
    rep.regime = restricted ? "restricted" : "global";
    double gamma = 1.0;
    for (std::size_t k = 0; k < total.c_req.size(); ++k, gamma *= 0.5) {
        if (total.blocked[k] || total.c_req[k] > kCmax)
            continue;
        rep.feasible = true;
        rep.gamma = gamma;
        rep.c = 0.0;
        if (total.c_req[k] > 0.0) {
            double c = std::ldexp(1.0, -20);
            while (c < total.c_req[k])
                c *= 2.0;
            rep.c = c;
        }
        return rep;
    }
    rep.gamma = std::ldexp(1.0, -(LowerBoundPartial::kGammas - 1));
    rep.c = kCmax;
    rep.violations = total.over.back();
    return rep;
}

namespace {

enum Stat { kMonoP, kMonoW, kLip, kBregLo, kBregHi, kSigned, kStats };

struct StatAcc {
    double margin = 0.0;
    std::size_t samples = 0;
    std::size_t violations = 0;
};

struct BatteryPartial {
    std::array<StatAcc, kStats> stats{};
    std::array<GxiRange, std::size(kExponentSet)> bregman{};
};

void add_lower(StatAcc& s, double lhs, double ref_rhs, double scale)
{
    ++s.samples;
    const double m = lhs / ref_rhs;
    s.margin = s.samples == 1 ? m : std::min(s.margin, m);
    if (lhs - ref_rhs < -kRoundoff * scale)
        ++s.violations;
}

void add_upper(StatAcc& s, double lhs, double ref_rhs, double scale)
{
    ++s.samples;
    const double m = lhs / ref_rhs;
    s.margin = s.samples == 1 ? m : std::max(s.margin, m);
    if (lhs - ref_rhs > kRoundoff * scale)
        ++s.violations;
}

void add_range(GxiRange& g, double ratio, double value)
{
    if (g.samples++ == 0) {
        g.c_est = g.C_est = ratio;
        g.min_g = value;
        return;
    }
    g.c_est = std::min(g.c_est, ratio);
    g.C_est = std::max(g.C_est, ratio);
    g.min_g = std::min(g.min_g, value);
}

double bregman_lower_ref(double p)
{
    return 0.5 * std::min(0.5 * p, 1.0 / (std::pow(2.0, p - 1.0) - 1.0));
}

double bregman_upper_ref(double p)
{
    return 0.5 * p * (p - 1.0) * std::pow(2.0, std::max(p - 3.0, 0.0));
}

}  // namespace

bool BatteryReport::passed() const
{
    for (const auto& r : ratios)
        if (!r.passed())
            return false;
    for (const auto& l : lower_bound_G)
        if (!l.feasible)
            return false;
    for (const auto& g : bregman)
        if (!(g.c_est > 0.0) || g.min_g < 0.0)
            return false;
    return true;
}

const GxiRange* BatteryReport::bregman_for(double p) const
{
    for (const auto& g : bregman)
        if (g.p == p)
            return &g;
    return nullptr;
}

BatteryReport run_battery(std::size_t samples, std::uint64_t seed, double delta, unsigned threads)
{
    const CounterRng rng(seed);
    constexpr std::size_t kP = std::size(kExponentSet);

    auto run_chunk = [&](std::size_t chunk) {
        BatteryPartial part;
        for (std::size_t j = 0; j < kP; ++j)
            part.bregman[j].p = kExponentSet[j];
        const std::size_t lo = chunk * kChunk, hi = std::min(samples, lo + kChunk);
        for (std::size_t idx = lo; idx < hi; ++idx) {
            const auto i = static_cast<std::uint64_t>(idx);
            const double p = kExponentSet[idx % kP];
            const int d = sample_dim(rng, i);
            const Vec x = sample_vector(rng, i, 0, d);
            Vec y = sample_vector(rng, i, 1, d);
            if (rng.uniform(i, 1001) < 0.05)
                y = x + 1e-6 * sample_vector(rng, i, 2, d);

            const double gap = (x - y).norm();
            if (gap > kRatioGuard) {
                const Pairing pr = monotone_pairing(x, y, p);
                const double size = (abs_power(x.norm(), p - 1.0) + abs_power(y.norm(), p - 1.0));
                const double scale = size * gap;
                add_lower(part.stats[kMonoP], pr.lhs, std::pow(2.0, 2.0 - p) * pr.p_lower, scale);
                add_lower(part.stats[kMonoW], pr.lhs, 0.5 * pr.weighted_lower, scale);
                const double lip = (p - 1.0) * pr.weighted_lower / gap;
                add_upper(part.stats[kLip], pr.upper, lip, size + lip);
            }

            // Bregman bound: xi = x, increment y
            if (y.norm() > kRatioGuard) {
                const double gv = g_xi(x, y, p);
                const double ny = y.norm();
                const double den = ny * ny * abs_power(x.norm(), p - 2.0) + abs_power(ny, p);
                add_range(part.bregman[idx % kP], gv / den, gv);
                const double scale = bregman_upper_ref(p) * den;
                add_lower(part.stats[kBregLo], gv, bregman_lower_ref(p) * den, scale);
                add_upper(part.stats[kBregHi], gv, scale, scale);
            }

            // signed powers, scalar x and h
            const double beta = 1.0 / (p - 1.0);
            const double xs = x[0], hs = y[0];
            if (std::abs(hs) > kRatioGuard) {
                const double a = signed_power(xs + hs, beta), b = signed_power(xs, beta);
                const double rhs = std::pow(2.0, 1.0 - beta) * std::pow(std::abs(hs), beta);
                add_upper(part.stats[kSigned], std::abs(a - b), rhs, std::abs(a) + std::abs(b));
            }
        }
        return part;
    };
    const auto parts = parallel_map<BatteryPartial>(chunk_count(samples), threads, run_chunk);

    BatteryReport rep;
    rep.seed = seed;
    rep.samples = samples;
    static const std::array<const char*, kStats> kNames{
        "monotone_p", "monotone_weighted", "flux_lipschitz",
        "bregman_lower", "bregman_upper", "signed_power_holder"};
    static const std::array<const char*, kStats> kRefs{
        "2^(2-p)", "1/2", "p-1",
        "min(p/2, 1/(2^(p-1)-1))/2", "p(p-1)2^max(p-3,0)/2", "2^(1-1/(p-1))"};
    static const std::array<bool, kStats> kLower{true, true, false, true, false, false};
    for (int s = 0; s < kStats; ++s) {
        RatioStat r;
        r.name = kNames[static_cast<std::size_t>(s)];
        r.reference = kRefs[static_cast<std::size_t>(s)];
        r.lower = kLower[static_cast<std::size_t>(s)];
        bool first = true;
        for (const auto& part : parts) {
            const StatAcc& a = part.stats[static_cast<std::size_t>(s)];
            if (a.samples == 0)
                continue;
            r.margin = first ? a.margin
                             : (r.lower ? std::min(r.margin, a.margin) : std::max(r.margin, a.margin));
            first = false;
            r.samples += a.samples;
            r.violations += a.violations;
        }
        rep.ratios.push_back(r);
    }
    for (std::size_t j = 0; j < kP; ++j) {
        GxiRange g;
        g.p = kExponentSet[j];
        for (const auto& part : parts) {
            const GxiRange& q = part.bregman[j];
            if (q.samples == 0)
                continue;
            if (g.samples == 0) {
                g = q;
                continue;
            }
            g.c_est = std::min(g.c_est, q.c_est);
            g.C_est = std::max(g.C_est, q.C_est);
            g.min_g = std::min(g.min_g, q.min_g);
            g.samples += q.samples;
        }
        rep.bregman.push_back(g);
    }
    for (std::size_t j = 0; j < kP; ++j)
        rep.lower_bound_G.push_back(check_lower_bound_G(kExponentSet[j], delta, samples / kP, seed + 1 + j, threads));
    return rep;
}

GxiRange g_xi_ratio_range(double p, int dim, std::size_t samples, std::uint64_t seed,
                          unsigned threads)
{
    if (dim < 1 || dim > 3)
        throw InvalidArgument("g_xi_ratio_range: dim must be 1, 2 or 3");
    const CounterRng rng(seed);
    auto run_chunk = [&](std::size_t chunk) {
        GxiRange g;
        g.p = p;
        const std::size_t lo = chunk * kChunk, hi = std::min(samples, lo + kChunk);
        for (std::size_t idx = lo; idx < hi; ++idx) {
            const auto i = static_cast<std::uint64_t>(idx);
            const Vec xi = sample_vector(rng, i, 0, dim);
            const Vec x = sample_vector(rng, i, 1, dim);
            if (x.norm() <= kRatioGuard)
                continue;
            add_range(g, g_xi_bounds_ratio(xi, x, p).first, g_xi(xi, x, p));
        }
        return g;
    };
    const auto parts = parallel_map<GxiRange>(chunk_count(samples), threads, run_chunk);
    GxiRange out;
    out.p = p;
    for (const auto& q : parts) {
        if (q.samples == 0)
            continue;
        if (out.samples == 0) {
            out = q;
            continue;
        }
        out.c_est = std::min(out.c_est, q.c_est);
        out.C_est = std::max(out.C_est, q.C_est);
        out.min_g = std::min(out.min_g, q.min_g);
        out.samples += q.samples;
    }
    return out;
}

}  // namespace phom
