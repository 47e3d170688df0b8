#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "hardy/error.hpp"
#include "hardy/functionals.hpp"
#include "hardy/grid.hpp"

namespace hardy {

/// Distinct levels (decreasing) and the measure of {u >= level} for each.
struct LayerProfile {
    std::vector<double> thresholds;
    std::vector<double> superlevel_measures;
};

inline LayerProfile layer_profile(std::span<const double> values, std::span<const double> measures)
{
    if (values.size() != measures.size()) {
        throw UsageError("layer_profile: values and measures differ in length");
    }
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    LayerProfile lp;
    double acc = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        acc += measures[order[r]];
        const bool last_of_level = r + 1 == order.size() || values[order[r + 1]] != values[order[r]];
        if (last_of_level) {
            lp.thresholds.push_back(values[order[r]]);
            lp.superlevel_measures.push_back(acc);
        }
    }
    return lp;
}

namespace detail {

inline void check_rearrangement_input(std::span<const double> values, std::span<const double> measures)
{
    if (values.size() != measures.size()) {
        throw UsageError("rearrangement: values and measures differ in length");
    }
    for (double m : measures) {
        if (!(m > 0.0)) {
            throw ConfigurationError("rearrangement: cell measures must be positive");
        }
    }
    for (double v : values) {
        if (!(v >= 0.0)) {
            throw DomainError("rearrangement: values must be nonnegative");
        }
    }
}

// Sort-and-refill along a strided line; stable so ties keep their input order.
inline void rearrange_line(double* u, std::size_t n, std::size_t stride, std::vector<double>& scratch)
{
    scratch.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        scratch[i] = u[i * stride];
    }
    std::stable_sort(scratch.begin(), scratch.end(), std::greater<>());
    for (std::size_t i = 0; i < n; ++i) {
        u[i * stride] = scratch[i];
    }
}

} // namespace detail

/// Discrete decreasing rearrangement of cell values, cells ordered by radius.
///
/// Values are sorted in decreasing order and refilled from the center outward.
/// Cell geometry is kept fixed, so superlevel sets are equimeasurable exactly
/// when all measures agree and up to one cell otherwise; see layer_mismatch.
inline std::vector<double> decreasing_rearrangement_1d(std::span<const double> values, std::span<const double> measures)
{
    detail::check_rearrangement_input(values, measures);
    std::vector<double> out(values.begin(), values.end());
    std::vector<double> scratch;
    detail::rearrange_line(out.data(), out.size(), 1, scratch);
    return out;
}

struct LayerMismatch {
    double max_abs = 0.0;
    double level = 0.0;
};

/// Largest |mu_before({u >= l}) - mu_after({u >= l})| over the levels of `before`.
inline LayerMismatch layer_mismatch(std::span<const double> before, std::span<const double> after,
                                    std::span<const double> measures)
{
    if (before.size() != after.size() || before.size() != measures.size()) {
        throw UsageError("layer_mismatch: length mismatch");
    }
    const LayerProfile lp = layer_profile(before, measures);
    LayerMismatch worst;
    for (std::size_t l = 0; l < lp.thresholds.size(); ++l) {
        double mu_after = 0.0;
        for (std::size_t c = 0; c < after.size(); ++c) {
            if (after[c] >= lp.thresholds[l]) {
                mu_after += measures[c];
            }
        }
        const double diff = std::abs(mu_after - lp.superlevel_measures[l]);
        if (diff > worst.max_abs) {
            worst = {diff, lp.thresholds[l]};
        }
    }
    return worst;
}

/// Schwarz symmetrization in y for every fixed |z| row.
inline GridFunction schwarz_y(const GridFunction& u)
{
    const CylGrid& g = u.grid();
    std::vector<double> v(u.values().begin(), u.values().end());
    std::vector<double> scratch;
    for (std::size_t j = 0; j < g.nt(); ++j) {
        detail::rearrange_line(v.data() + j, g.ns(), g.nt(), scratch);
    }
    return GridFunction(u.grid_ptr(), std::move(v));
}

/// Schwarz symmetrization in z for every fixed |y| column; identity when m = 0.
inline GridFunction schwarz_z(const GridFunction& u)
{
    const CylGrid& g = u.grid();
    std::vector<double> v(u.values().begin(), u.values().end());
    if (!g.t().degenerate()) {
        std::vector<double> scratch;
        for (std::size_t i = 0; i < g.ns(); ++i) {
            detail::rearrange_line(v.data() + i * g.nt(), g.nt(), 1, scratch);
        }
    }
    return GridFunction(u.grid_ptr(), std::move(v));
}

/// u** = schwarz_z(schwarz_y(u)). Sorting the columns of a row-sorted array
/// keeps the rows sorted, so the result is nonincreasing in both s and t.
inline GridFunction double_star(const GridFunction& u) { return schwarz_z(schwarz_y(u)); }

/// Largest increase along s or t between neighbouring cells, relative to max |u|.
/// Zero exactly for double-star fixed points.
inline double symmetry_deviation(const CylGrid& g, std::span<const double> u)
{
    double worst = 0.0;
    double top = 0.0;
    for (std::size_t i = 0; i < g.ns(); ++i) {
        for (std::size_t j = 0; j < g.nt(); ++j) {
            const std::size_t c = g.index(i, j);
            top = std::max(top, std::abs(u[c]));
            if (i + 1 < g.ns()) {
                worst = std::max(worst, u[c + g.nt()] - u[c]);
            }
            if (j + 1 < g.nt()) {
                worst = std::max(worst, u[c + 1] - u[c]);
            }
        }
    }
    return top > 0.0 ? worst / top : 0.0;
}

inline bool is_double_star_fixed_point(const GridFunction& u, double tol = 0.0)
{
    return symmetry_deviation(u.grid(), u.values()) <= tol;
}

struct PairedIntegrals {
    double plain = 0.0;
    double symmetrized = 0.0;
};

namespace detail {

inline double weighted_product(const GridFunction& a, std::span<const double> b)
{
    const CylGrid& g = a.grid();
    double sum = 0.0;
    for (std::size_t i = 0; i < g.ns(); ++i) {
        for (std::size_t j = 0; j < g.nt(); ++j) {
            const std::size_t c = g.index(i, j);
            sum += a.values()[c] * b[c] * g.measure(i, j);
        }
    }
    return sum;
}

} // namespace detail

/// (int u v, int u** v) for a weight v that is its own double star.
inline PairedIntegrals hardy_littlewood_check(const GridFunction& u, const GridFunction& v)
{
    if (u.grid_ptr() != v.grid_ptr() && u.grid().descriptor() != v.grid().descriptor()) {
        throw UsageError("hardy_littlewood_check: u and v live on different grids");
    }
    if (!is_double_star_fixed_point(v)) {
        throw UsageError("hardy_littlewood_check: the weight v must satisfy v** = v");
    }
    return {detail::weighted_product(u, v.values()), detail::weighted_product(double_star(u), v.values())};
}

struct ReferenceWeight {
    GridFunction weight;
    /// u is nonzero at some |z| beyond the cutoff R.
    bool support_exceeded = false;
};

/// v(y, z) = |y|^{-beta} for |z| <= R and 0 otherwise, with |y|^{-beta} taken
/// as exact cell averages. R is a caller-supplied cutoff; the flag reports
/// whether u reaches past it in |z|.
inline ReferenceWeight reference_weight(const GridFunction& u, double beta, double R)
{
    const CylGrid& g = u.grid();
    if (!(beta >= 0.0) || !(beta < g.k())) {
        throw DomainError("reference weight needs 0 <= beta < k");
    }
    const std::vector<double> w = g.s().power_average(-beta);
    const auto t = g.t().nodes();
    std::vector<double> v(g.size(), 0.0);
    bool exceeded = false;
    for (std::size_t i = 0; i < g.ns(); ++i) {
        for (std::size_t j = 0; j < g.nt(); ++j) {
            const bool inside = g.t().degenerate() || t[j] <= R;
            v[g.index(i, j)] = inside ? w[i] : 0.0;
            if (!inside && u.at(i, j) > 0.0) {
                exceeded = true;
            }
        }
    }
    return {GridFunction(u.grid_ptr(), std::move(v)), exceeded};
}

struct PolyaSzegoReport {
    double energy_plain = 0.0;
    double energy_steiner = 0.0;  // after schwarz_y
    double energy_double = 0.0;   // after double_star
    /// Sum of the positive parts of E(u*) - E(u) and E(u**) - E(u*).
    double slack = 0.0;
    double relative_slack() const { return energy_plain > 0.0 ? slack / energy_plain : 0.0; }
};

inline PolyaSzegoReport polya_szego_check(const GridFunction& u, double p)
{
    if (!(p >= 1.0)) {
        throw DomainError("polya_szego_check needs p >= 1");
    }
    const GridFunction u1 = schwarz_y(u);
    const GridFunction u2 = schwarz_z(u1);
    PolyaSzegoReport r;
    r.energy_plain = weighted_dirichlet(u, p, 0.0);
    r.energy_steiner = weighted_dirichlet(u1, p, 0.0);
    r.energy_double = weighted_dirichlet(u2, p, 0.0);
    r.slack = std::max(0.0, r.energy_steiner - r.energy_plain) + std::max(0.0, r.energy_double - r.energy_steiner);
    return r;
}

/// (int u^q g(|y|) h(|z|), int (u**)^q g h) with g, h nonincreasing node samples.
inline PairedIntegrals monotone_weight_constraint(const GridFunction& u, std::span<const double> g_s,
                                                  std::span<const double> h_t, double q)
{
    const CylGrid& g = u.grid();
    if (g_s.size() != g.ns() || h_t.size() != g.nt()) {
        throw UsageError("monotone_weight_constraint: profile lengths do not match the grid");
    }
    for (std::size_t i = 1; i < g_s.size(); ++i) {
        if (g_s[i] > g_s[i - 1]) {
            throw DomainError("monotone_weight_constraint: g must be nonincreasing");
        }
    }
    for (std::size_t j = 1; j < h_t.size(); ++j) {
        if (h_t[j] > h_t[j - 1]) {
            throw DomainError("monotone_weight_constraint: h must be nonincreasing");
        }
    }
    if (!(q > 0.0)) {
        throw DomainError("monotone_weight_constraint needs q > 0");
    }
    auto integral = [&](const GridFunction& f) {
        double sum = 0.0;
        for (std::size_t i = 0; i < g.ns(); ++i) {
            for (std::size_t j = 0; j < g.nt(); ++j) {
                sum += std::pow(f.at(i, j), q) * g_s[i] * h_t[j] * g.measure(i, j);
            }
        }
        return sum;
    };
    return {integral(u), integral(double_star(u))};
}

} // namespace hardy
