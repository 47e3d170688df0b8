#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "hardy/grid.hpp"

namespace hardy {

/// Seeded generator with a platform-independent mapping to [0, 1).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 engine_;
};

/// cos^2(pi t / 2) on [0, 1), zero beyond: a C^1 bump with w(0) = 1 and w'(0) = 0.
inline double bump_profile(double t)
{
    if (t >= 1.0) {
        return 0.0;
    }
    const double c = std::cos(0.5 * std::numbers::pi * t);
    return c * c;
}

/// e^{-s^2 - t^2} sampled at cell nodes.
inline GridFunction default_init(CylGridPtr grid)
{
    return GridFunction::sample(std::move(grid), [](double s, double t) { return std::exp(-s * s - t * t); });
}

/// default_init times cellwise factors 1 + amplitude * U(-1, 1).
inline GridFunction perturbed_init(CylGridPtr grid, std::uint64_t seed, double amplitude = 0.3)
{
    Rng rng(seed);
    const GridFunction base = default_init(grid);
    std::vector<double> v(base.values().begin(), base.values().end());
    for (double& x : v) {
        x *= 1.0 + amplitude * rng.uniform(-1.0, 1.0);
    }
    return GridFunction(std::move(grid), std::move(v));
}

/// Sum of three Gaussian bumps with random centers, widths and heights, damped
/// to vanish at the outer radii: (1 - (s/Rs)^2)(1 - (t/Rt)^2).
inline GridFunction random_smooth_function(CylGridPtr grid, std::uint64_t seed)
{
    Rng rng(seed);
    const double Rs = grid->s().r_max();
    const double Rt = grid->t().degenerate() ? 1.0 : grid->t().r_max();
    struct Bump {
        double s0, t0, width, height;
    };
    std::vector<Bump> bumps(3);
    for (auto& b : bumps) {
        b.s0 = rng.uniform(0.0, 0.5 * Rs);
        b.t0 = rng.uniform(0.0, 0.5 * Rt);
        b.width = rng.uniform(0.3, 1.0) * 0.25 * std::max(Rs, Rt);
        b.height = rng.uniform(0.5, 1.5);
    }
    const bool flat_t = grid->t().degenerate();
    return GridFunction::sample(std::move(grid), [&](double s, double t) {
        double sum = 0.0;
        for (const auto& b : bumps) {
            const double dt = flat_t ? 0.0 : t - b.t0;
            sum += b.height * std::exp(-((s - b.s0) * (s - b.s0) + dt * dt) / (b.width * b.width));
        }
        const double damp_s = 1.0 - (s / Rs) * (s / Rs);
        const double damp_t = flat_t ? 1.0 : 1.0 - (t / Rt) * (t / Rt);
        return sum * damp_s * damp_t;
    });
}

} // namespace hardy
