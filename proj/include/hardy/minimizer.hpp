#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hardy/descent.hpp"
#include "hardy/error.hpp"
#include "hardy/families.hpp"
#include "hardy/functionals.hpp"
#include "hardy/grid.hpp"
#include "hardy/rearrange.hpp"
#include "hardy/sharp_constant.hpp"

namespace hardy {

struct MinimizeOptions {
    DescentOptions descent;
    /// Iterates started from a double-star fixed point whose symmetry deviation
    /// exceeds this are counted in closure_violations (reported, never fatal).
    double closure_tol = 1e-6;
    /// Tolerance for the reported monotonicity of the final iterate in |y|.
    double y_monotone_tol = 1e-4;

    json to_json() const
    {
        return {{"descent", descent.to_json()}, {"closure_tol", closure_tol}, {"y_monotone_tol", y_monotone_tol}};
    }
};

struct MinimizationTrace {
    MinimizationTrace(Params params_, std::vector<IterationRecord> iterations_, GridFunction final_u_)
        : params(params_), iterations(std::move(iterations_)), final_u(std::move(final_u_))
    {
    }

    Params params;
    std::vector<IterationRecord> iterations;
    GridFunction final_u;
    bool converged = false;
    std::string stop_reason;
    double delta = 0.0;
    /// Unregularized hs_quotient of final_u.
    double final_quotient = 0.0;
    double constraint_residual = 0.0;
    double final_symmetry_deviation = 0.0;
    bool started_symmetric = false;
    int closure_violations = 0;
    double max_symmetry_deviation = 0.0;
    /// Largest increase along |y| of final_u relative to its max, and whether it is within y_monotone_tol.
    double y_monotone_deviation = 0.0;
    bool y_monotone = false;
    /// |z| node where final_u is largest.
    double t_argmax = 0.0;

    bool monotone() const
    {
        for (std::size_t i = 1; i < iterations.size(); ++i) {
            if (iterations[i].quotient > iterations[i - 1].quotient) {
                return false;
            }
        }
        return true;
    }

    json to_json() const
    {
        json its = json::array();
        for (const auto& r : iterations) {
            its.push_back({{"energy", r.energy},
                           {"constraint", r.constraint},
                           {"quotient", r.quotient},
                           {"step", r.step},
                           {"symmetry_deviation", r.symmetry_deviation}});
        }
        return {{"params", params.to_json()},
                {"grid", final_u.grid().descriptor()},
                {"converged", converged},
                {"stop_reason", stop_reason},
                {"delta", delta},
                {"final_quotient", final_quotient},
                {"constraint_residual", constraint_residual},
                {"final_symmetry_deviation", final_symmetry_deviation},
                {"started_symmetric", started_symmetric},
                {"closure_violations", closure_violations},
                {"max_symmetry_deviation", max_symmetry_deviation},
                {"y_monotone_deviation", y_monotone_deviation},
                {"y_monotone", y_monotone},
                {"t_argmax", t_argmax},
                {"monotone", monotone()},
                {"iterations", its}};
    }
};

namespace detail {

inline double y_monotone_deviation(const GridFunction& u)
{
    const CylGrid& g = u.grid();
    double worst = 0.0;
    for (std::size_t j = 0; j < g.nt(); ++j) {
        for (std::size_t i = 0; i + 1 < g.ns(); ++i) {
            worst = std::max(worst, u.at(i + 1, j) - u.at(i, j));
        }
    }
    const double top = u.max();
    return top > 0.0 ? worst / top : 0.0;
}

} // namespace detail

/// Normalized descent for inf int |grad u|^p subject to int |u|^q / |y|^beta = 1.
inline MinimizationTrace minimize_hs(const Params& params, const GridFunction& init, const MinimizeOptions& opts = {})
{
    if (params.mode != Mode::HardySobolev) {
        throw UsageError("minimize_hs needs Hardy-Sobolev parameters");
    }
    detail::check_grid(init, params);
    const CylGrid& g = init.grid();
    if (init.max() == 0.0) {
        throw DegenerateInputError("initial function is identically zero");
    }
    const bool symmetric = is_double_star_fixed_point(init);
    DescentResult d = descend_quotient(g, std::vector<double>(init.values().begin(), init.values().end()), params.p,
                                       params.q, 0.0, -params.beta, opts.descent);

    MinimizationTrace tr(params, std::move(d.iterations), GridFunction(init.grid_ptr(), std::move(d.u)));
    tr.converged = d.converged;
    tr.stop_reason = d.stop_reason;
    tr.delta = d.delta;
    tr.final_quotient = hs_quotient(tr.final_u, params).value;
    tr.constraint_residual = std::abs(hs_constraint(tr.final_u, params) - 1.0);
    tr.final_symmetry_deviation = symmetry_deviation(g, tr.final_u.values());
    tr.started_symmetric = symmetric;
    for (const auto& r : tr.iterations) {
        tr.max_symmetry_deviation = std::max(tr.max_symmetry_deviation, r.symmetry_deviation);
        if (symmetric && r.symmetry_deviation > opts.closure_tol) {
            ++tr.closure_violations;
        }
    }
    tr.y_monotone_deviation = detail::y_monotone_deviation(tr.final_u);
    tr.y_monotone = tr.y_monotone_deviation <= opts.y_monotone_tol;
    const auto vals = tr.final_u.values();
    const std::size_t top = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    tr.t_argmax = g.t().nodes()[top % g.nt()];
    return tr;
}

/// Grids used for Hardy-Sobolev minimization: geometric in both |y| and |z|.
inline CylGridPtr default_minimizer_grid(const Params& params, int n = 64, double R = 8.0, double ratio = 1.1,
                                         int refine = 0)
{
    const RadialGridSpec s = RadialGridSpec{params.k, R, n, Geometric{ratio}}.refined(refine);
    if (params.N == params.k) {
        return make_cyl_grid(make_radial_grid(s));
    }
    const RadialGridSpec t = RadialGridSpec{params.N - params.k, R, n, Geometric{ratio}}.refined(refine);
    return make_cyl_grid(make_radial_grid(s), make_radial_grid(t));
}

struct SymmetrizeReport {
    double quotient_before = 0.0;
    double quotient_after = 0.0;
    /// Raw energies and constraint integrals of u and u** (before renormalization).
    double energy_before = 0.0;
    double energy_after = 0.0;
    double constraint_before = 0.0;
    double constraint_after = 0.0;
    /// max(0, quotient_after - quotient_before).
    double slack = 0.0;

    double relative_slack() const { return quotient_before > 0.0 ? slack / quotient_before : 0.0; }

    json to_json() const
    {
        return {{"quotient_before", quotient_before}, {"quotient_after", quotient_after},
                {"energy_before", energy_before},     {"energy_after", energy_after},
                {"constraint_before", constraint_before}, {"constraint_after", constraint_after},
                {"slack", slack}};
    }
};

/// Compares u with u** after renormalizing both to unit constraint.
inline SymmetrizeReport symmetrize_and_compare(const GridFunction& u, const Params& params)
{
    const GridFunction us = double_star(u);
    SymmetrizeReport r;
    r.constraint_before = hs_constraint(u, params);
    r.constraint_after = hs_constraint(us, params);
    if (!(r.constraint_before > 0.0)) {
        throw DegenerateInputError("constraint integral of u vanishes");
    }
    r.energy_before = weighted_dirichlet(u, params.p, 0.0);
    r.energy_after = weighted_dirichlet(us, params.p, 0.0);
    r.quotient_before = hs_quotient(u, params).value;
    r.quotient_after = hs_quotient(us, params).value;
    r.slack = std::max(0.0, r.quotient_after - r.quotient_before);
    return r;
}

struct EndpointSweep {
    double target = 0.0;
    std::vector<ProductSweepRow> rows;
    /// hs_quotient of each row's product function (equals the Hardy quotient with alpha = -p).
    std::vector<double> hs_values;
};

/// hs_quotient along the product ladder at beta = p = q, approaching ((k - p)/p)^p.
inline EndpointSweep hardy_endpoint_sweep(const Params& params, const ProductLadder& ladder)
{
    if (params.mode != Mode::HardySobolev) {
        throw UsageError("hardy_endpoint_sweep needs Hardy-Sobolev parameters");
    }
    if (!(params.p < params.k)) {
        throw DomainError("hardy_endpoint_sweep needs p < k");
    }
    if (params.beta != params.p) {
        throw ValidationError("beta = p violated");
    }
    EndpointSweep out;
    out.target = hardy_infimum(params.p, -params.p, params.k);
    out.rows = product_sweep(params, ladder);
    for (const auto& row : out.rows) {
        out.hs_values.push_back(row.report.value);
    }
    return out;
}

} // namespace hardy
