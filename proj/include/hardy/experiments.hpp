#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hardy/families.hpp"
#include "hardy/functionals.hpp"
#include "hardy/grid.hpp"
#include "hardy/minimizer.hpp"
#include "hardy/rearrange.hpp"
#include "hardy/sharp_constant.hpp"

namespace hardy {

/// Product of equal-measure radial grids: every cell carries the same measure.
inline CylGridPtr equal_measure_grid(int k, int m, double R, int n)
{
    RadialGrid s = make_radial_grid(k, R, n, EqualMeasure{});
    if (m == 0) {
        return make_cyl_grid(std::move(s));
    }
    return make_cyl_grid(std::move(s), make_radial_grid(m, R, n, EqualMeasure{}));
}

/// Cellwise i.i.d. uniform values in [0, 1).
inline GridFunction random_cell_values(CylGridPtr grid, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<double> v(grid->size());
    for (double& x : v) {
        x = rng.uniform();
    }
    return GridFunction(std::move(grid), std::move(v));
}

struct ConvexitySuite {
    long samples = 0;
    long violations = 0;
    /// Largest lhs / rhs seen (at most 1 when the bound holds).
    double max_ratio = 0.0;

    json to_json() const { return {{"samples", samples}, {"violations", violations}, {"max_ratio", max_ratio}}; }
};

/// s, t uniform in [0, 10], lambda in (0, 1), p in (1, 6).
inline ConvexitySuite convexity_suite(long samples, std::uint64_t seed)
{
    Rng rng(seed);
    ConvexitySuite out;
    out.samples = samples;
    for (long i = 0; i < samples; ++i) {
        const double s = rng.uniform(0.0, 10.0);
        const double t = rng.uniform(0.0, 10.0);
        double lambda = rng.uniform();
        while (lambda == 0.0) {
            lambda = rng.uniform();
        }
        double p = rng.uniform(1.0, 6.0);
        while (p == 1.0) {
            p = rng.uniform(1.0, 6.0);
        }
        const ConvexityBound b = convexity_bound(s, t, lambda, p);
        if (b.lhs > b.rhs) {
            ++out.violations;
        }
        if (b.rhs > 0.0) {
            out.max_ratio = std::max(out.max_ratio, b.lhs / b.rhs);
        }
    }
    return out;
}

struct RearrangementSuite {
    int n = 0;
    int trials = 0;
    /// max |int u^q - int (u**)^q| / int u^q over trials and q in {1, 2, 3}.
    double max_equimeasurability_error = 0.0;
    /// Trials where the sorted value multiset changed.
    long multiset_changes = 0;
    long hl_violations = 0;
    long monotone_weight_violations = 0;
    long idempotence_failures = 0;
    long row_monotonicity_failures = 0;
    /// Max relative Polya-Szego slack over the smooth family on n^2 and (2n)^2 grids.
    double ps_slack_coarse = 0.0;
    double ps_slack_fine = 0.0;
    int ps_family_size = 0;

    json to_json() const
    {
        return {{"n", n},
                {"trials", trials},
                {"max_equimeasurability_error", max_equimeasurability_error},
                {"multiset_changes", multiset_changes},
                {"hardy_littlewood_violations", hl_violations},
                {"monotone_weight_violations", monotone_weight_violations},
                {"idempotence_failures", idempotence_failures},
                {"row_monotonicity_failures", row_monotonicity_failures},
                {"polya_szego",
                 {{"family_size", ps_family_size},
                  {"levels", {n, 2 * n}},
                  {"relative_slack", {ps_slack_coarse, ps_slack_fine}}}}};
    }
};

namespace detail {

// Relative rounding allowance when comparing two sums of the same terms in different order.
inline constexpr double kSumRounding = 1e-12;

inline bool rows_nonincreasing(const GridFunction& u)
{
    const CylGrid& g = u.grid();
    for (std::size_t j = 0; j < g.nt(); ++j) {
        for (std::size_t i = 0; i + 1 < g.ns(); ++i) {
            if (u.at(i + 1, j) > u.at(i, j)) {
                return false;
            }
        }
    }
    return true;
}

inline double max_ps_slack(int k, int m, double R, int n, double p, int family, std::uint64_t seed)
{
    const CylGridPtr g = equal_measure_grid(k, m, R, n);
    double worst = 0.0;
    for (int f = 0; f < family; ++f) {
        const GridFunction u = random_smooth_function(g, seed + static_cast<std::uint64_t>(f));
        worst = std::max(worst, polya_szego_check(u, p).relative_slack());
    }
    return worst;
}

} // namespace detail

/// Random-trial checks of the double symmetrization on equal-measure grids.
inline RearrangementSuite rearrangement_suite(int n, int trials, std::uint64_t seed, int k = 2, int m = 2,
                                              double R = 4.0, double beta = 1.0, double p = 2.0, int ps_family = 20)
{
    const CylGridPtr g = equal_measure_grid(k, m, R, n);
    RearrangementSuite out;
    out.n = n;
    out.trials = trials;

    std::vector<double> g_s(g->ns());
    std::vector<double> h_t(g->nt());
    for (std::size_t i = 0; i < g->ns(); ++i) {
        g_s[i] = std::exp(-g->s().nodes()[i]);
    }
    for (std::size_t j = 0; j < g->nt(); ++j) {
        h_t[j] = 1.0 / (1.0 + g->t().nodes()[j]);
    }

    for (int trial = 0; trial < trials; ++trial) {
        const GridFunction u = random_cell_values(g, seed + static_cast<std::uint64_t>(trial));
        const GridFunction us = double_star(u);

        std::vector<double> a(u.values().begin(), u.values().end());
        std::vector<double> b(us.values().begin(), us.values().end());
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b) {
            ++out.multiset_changes;
        }
        for (double q : {1.0, 2.0, 3.0}) {
            const double before = weighted_p_norm(u, q, 0.0);
            const double after = weighted_p_norm(us, q, 0.0);
            out.max_equimeasurability_error =
                std::max(out.max_equimeasurability_error, std::abs(after - before) / before);
        }

        const ReferenceWeight v = reference_weight(u, beta, 0.5 * R);
        const PairedIntegrals hl = hardy_littlewood_check(u, v.weight);
        if (hl.symmetrized < hl.plain * (1.0 - detail::kSumRounding)) {
            ++out.hl_violations;
        }
        const PairedIntegrals mw = monotone_weight_constraint(u, g_s, h_t, 2.0);
        if (mw.symmetrized < mw.plain * (1.0 - detail::kSumRounding)) {
            ++out.monotone_weight_violations;
        }

        const GridFunction uss = double_star(us);
        if (!std::equal(uss.values().begin(), uss.values().end(), us.values().begin())) {
            ++out.idempotence_failures;
        }
        if (!detail::rows_nonincreasing(schwarz_y(u))) {
            ++out.row_monotonicity_failures;
        }
    }

    out.ps_family_size = ps_family;
    out.ps_slack_coarse = detail::max_ps_slack(k, m, R, n, p, ps_family, seed);
    out.ps_slack_fine = detail::max_ps_slack(k, m, R, 2 * n, p, ps_family, seed);
    return out;
}

struct SymmetrizeSuite {
    int trials = 0;
    double max_slack = 0.0;
    double max_relative_slack = 0.0;
    /// Trials where u** has a larger quotient than u beyond summation rounding.
    long increases = 0;
    std::vector<SymmetrizeReport> reports;

    json summary() const
    {
        return {{"trials", trials},
                {"max_slack", max_slack},
                {"max_relative_slack", max_relative_slack},
                {"increases", increases}};
    }
};

/// symmetrize_and_compare on random smooth functions (sums of three bumps).
inline SymmetrizeSuite symmetrize_suite(const Params& params, const CylGridPtr& grid, int trials, std::uint64_t seed)
{
    SymmetrizeSuite out;
    out.trials = trials;
    for (int trial = 0; trial < trials; ++trial) {
        const GridFunction u = random_smooth_function(grid, seed + static_cast<std::uint64_t>(trial));
        const SymmetrizeReport r = symmetrize_and_compare(u, params);
        out.max_slack = std::max(out.max_slack, r.slack);
        out.max_relative_slack = std::max(out.max_relative_slack, r.relative_slack());
        if (r.quotient_after > r.quotient_before * (1.0 + detail::kSumRounding)) {
            ++out.increases;
        }
        out.reports.push_back(r);
    }
    return out;
}

} // namespace hardy
