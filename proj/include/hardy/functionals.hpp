#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hardy/error.hpp"
#include "hardy/grid.hpp"

namespace hardy {

enum class Mode { Hardy, HardySobolev };

/// Problem tuple (N, k, p, alpha, beta, q).
///
/// Hardy mode uses alpha and requires p > 1, alpha + k > 0. Hardy-Sobolev mode
/// uses beta and enforces 0 <= beta < k, beta <= p, p < N with the critical
/// exponent q = p (N - beta) / (N - p), always recomputed from (N, p, beta).
struct Params {
    Mode mode = Mode::Hardy;
    int N = 1;
    int k = 1;
    double p = 2.0;
    double alpha = 0.0;
    double beta = 0.0;
    double q = 2.0;

    static double critical_q(int N, double p, double beta) { return p * (N - beta) / (N - p); }

    static Params hardy(int N, int k, double p, double alpha)
    {
        check_common(N, k, p);
        if (!std::isfinite(alpha) || !(alpha + k > 0.0)) {
            throw ValidationError("alpha + k > 0 violated");
        }
        Params r;
        r.mode = Mode::Hardy;
        r.N = N;
        r.k = k;
        r.p = p;
        r.alpha = alpha;
        r.beta = 0.0;
        r.q = p;
        return r;
    }

    static Params hardy_sobolev(int N, int k, double p, double beta, std::optional<double> q = std::nullopt)
    {
        check_common(N, k, p);
        if (!std::isfinite(beta) || !(beta >= 0.0)) {
            throw ValidationError("beta >= 0 violated");
        }
        if (!(beta < k)) {
            throw ValidationError("beta < k violated");
        }
        if (!(beta <= p)) {
            throw ValidationError("beta <= p violated");
        }
        if (!(p < N)) {
            throw ValidationError("p < N violated");
        }
        const double qc = critical_q(N, p, beta);
        if (q && !(std::abs(*q - qc) <= 1e-12 * qc)) {
            throw ValidationError("q = p(N-beta)/(N-p) violated");
        }
        Params r;
        r.mode = Mode::HardySobolev;
        r.N = N;
        r.k = k;
        r.p = p;
        r.alpha = -p;
        r.beta = beta;
        r.q = qc;
        return r;
    }

    json to_json() const
    {
        json j{{"mode", mode == Mode::Hardy ? "hardy" : "hardy_sobolev"}, {"N", N}, {"k", k}, {"p", p}};
        if (mode == Mode::Hardy) {
            j["alpha"] = alpha;
        } else {
            j["beta"] = beta;
            j["q"] = q;
        }
        return j;
    }

private:
    static void check_common(int N, int k, double p)
    {
        if (N < 1) {
            throw ValidationError("N >= 1 violated");
        }
        if (k < 1 || k > N) {
            throw ValidationError("1 <= k <= N violated");
        }
        if (!std::isfinite(p) || !(p > 1.0)) {
            throw ValidationError("p > 1 violated");
        }
    }
};

/// Numerator, denominator and value of a Rayleigh-type quotient. When a
/// power-law tail beyond the grid was added analytically, the tail parts are
/// included in numerator/denominator and also reported separately.
struct QuotientReport {
    double numerator = 0.0;
    double denominator = 0.0;
    double value = 0.0;
    json grid;
    bool tail_corrected = false;
    double numerator_tail = 0.0;
    double denominator_tail = 0.0;

    json to_json() const
    {
        return {{"numerator", numerator},
                {"denominator", denominator},
                {"value", value},
                {"grid", grid},
                {"tail_corrected", tail_corrected},
                {"numerator_tail", numerator_tail},
                {"denominator_tail", denominator_tail}};
    }
};

namespace detail {

// Per-cell weight m_ij * <s^a>_i.
inline std::vector<double> cell_weights(const CylGrid& g, double a)
{
    const std::vector<double> w = g.s().power_average(a);
    std::vector<double> c(g.size());
    const auto ms = g.s().measures();
    const auto mt = g.t().measures();
    for (std::size_t i = 0; i < g.ns(); ++i) {
        for (std::size_t j = 0; j < g.nt(); ++j) {
            c[g.index(i, j)] = ms[i] * mt[j] * w[i];
        }
    }
    return c;
}

inline void check_weight(const CylGrid& g, double a)
{
    if (!(a + g.k() > 0.0)) {
        throw DomainError("weight |y|^" + fmt_short(a) + " is not integrable near y = 0 (needs a + k > 0)");
    }
}

inline double power_sum(std::span<const double> u, std::span<const double> weights, double p)
{
    double sum = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) {
        const double x = std::abs(u[c]);
        if (x != 0.0) {
            sum += (p == 2.0 ? x * x : std::pow(x, p)) * weights[c];
        }
    }
    return sum;
}

enum class Component { Both, SOnly, TOnly };

/// Discrete p-Dirichlet energy
///   sum_c weight_c * 1/4 sum_{fwd,bwd in s} sum_{fwd,bwd in t} (D_s^2 + D_t^2 + delta^2)^{p/2}
/// built from one-sided differences. Averaging the four corner combinations
/// keeps the form coercive (no checkerboard null mode) while remaining a
/// consistent approximation of int |grad u|^p. SOnly / TOnly drop the other
/// difference. s_outer is the boundary value at the outer s radius.
/// Optionally accumulates the gradient with respect to u.
inline double dirichlet_energy(const CylGrid& g, std::span<const double> u, std::span<const double> weights, double p,
                               double delta = 0.0, Component comp = Component::Both,
                               std::vector<double>* grad = nullptr, double s_outer = 0.0)
{
    const OneSidedDifferences d = one_sided_differences(g, u, s_outer);
    const std::size_t ns = g.ns();
    const std::size_t nt = g.nt();
    const bool has_s = comp != Component::TOnly;
    const bool has_t = !g.t().degenerate() && comp != Component::SOnly;
    const double half_p = 0.5 * p;
    const double d2 = delta * delta;
    const bool quadratic = (p == 2.0 && delta == 0.0);

    auto phi = [&](double x) { return quadratic ? x : std::pow(x + d2, half_p); };
    // d phi / dx
    auto dphi = [&](double x) { return quadratic ? 1.0 : half_p * std::pow(x + d2, half_p - 1.0); };

    std::vector<double> gs_f, gs_b, gt_f, gt_b;
    if (grad) {
        grad->assign(u.size(), 0.0);
        gs_f.assign(u.size(), 0.0);
        gs_b.assign(u.size(), 0.0);
        gt_f.assign(u.size(), 0.0);
        gt_b.assign(u.size(), 0.0);
    }

    double energy = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) {
        const double w = weights[c];
        if (w == 0.0) {
            continue;
        }
        const double sf = has_s ? d.s_fwd[c] * d.s_fwd[c] : 0.0;
        const double sb = has_s ? d.s_bwd[c] * d.s_bwd[c] : 0.0;
        const double tf = has_t ? d.t_fwd[c] * d.t_fwd[c] : 0.0;
        const double tb = has_t ? d.t_bwd[c] * d.t_bwd[c] : 0.0;
        const double x_ff = sf + tf, x_fb = sf + tb, x_bf = sb + tf, x_bb = sb + tb;
        energy += 0.25 * w * (phi(x_ff) + phi(x_fb) + phi(x_bf) + phi(x_bb));
        if (grad) {
            const double a_ff = dphi(x_ff), a_fb = dphi(x_fb), a_bf = dphi(x_bf), a_bb = dphi(x_bb);
            // dE/dD = 1/4 w * sum dphi * 2 D
            if (has_s) {
                gs_f[c] = 0.5 * w * (a_ff + a_fb) * d.s_fwd[c];
                gs_b[c] = 0.5 * w * (a_bf + a_bb) * d.s_bwd[c];
            }
            if (has_t) {
                gt_f[c] = 0.5 * w * (a_ff + a_bf) * d.t_fwd[c];
                gt_b[c] = 0.5 * w * (a_fb + a_bb) * d.t_bwd[c];
            }
        }
    }

    if (grad) {
        std::vector<double>& G = *grad;
        const auto rs = g.s().nodes();
        const double Rs = g.s().r_max();
        for (std::size_t i = 0; i < ns; ++i) {
            const double hf = i + 1 < ns ? rs[i + 1] - rs[i] : Rs - rs[i];
            const double hb = i > 0 ? rs[i] - rs[i - 1] : 1.0;
            for (std::size_t j = 0; j < nt; ++j) {
                const std::size_t c = i * nt + j;
                G[c] -= gs_f[c] / hf;
                if (i + 1 < ns) {
                    G[c + nt] += gs_f[c] / hf;
                }
                if (i > 0) {
                    G[c] += gs_b[c] / hb;
                    G[c - nt] -= gs_b[c] / hb;
                }
            }
        }
        if (has_t) {
            const auto rt = g.t().nodes();
            const double Rt = g.t().r_max();
            for (std::size_t j = 0; j < nt; ++j) {
                const double hf = j + 1 < nt ? rt[j + 1] - rt[j] : Rt - rt[j];
                const double hb = j > 0 ? rt[j] - rt[j - 1] : 1.0;
                for (std::size_t i = 0; i < ns; ++i) {
                    const std::size_t c = i * nt + j;
                    G[c] -= gt_f[c] / hf;
                    if (j + 1 < nt) {
                        G[c + 1] += gt_f[c] / hf;
                    }
                    if (j > 0) {
                        G[c] += gt_b[c] / hb;
                        G[c - 1] -= gt_b[c] / hb;
                    }
                }
            }
        }
    }
    return energy;
}

inline void check_grid(const GridFunction& u, const Params& params)
{
    if (u.grid().k() != params.k || u.grid().N() != params.N) {
        throw UsageError("grid (k=" + std::to_string(u.grid().k()) + ", N=" + std::to_string(u.grid().N()) +
                         ") does not match params (k=" + std::to_string(params.k) +
                         ", N=" + std::to_string(params.N) + ")");
    }
}

inline QuotientReport make_report(double num, double den, const CylGrid& g)
{
    if (!(den > 0.0)) {
        throw DegenerateInputError("quotient denominator vanishes");
    }
    QuotientReport r;
    r.numerator = num;
    r.denominator = den;
    r.value = num / den;
    r.grid = g.descriptor();
    return r;
}

} // namespace detail

/// sum_ij u_ij^p <|y|^a>_i m_ij
inline double weighted_p_norm(const GridFunction& u, double p, double a)
{
    detail::check_weight(u.grid(), a);
    return detail::power_sum(u.values(), detail::cell_weights(u.grid(), a), p);
}

/// Discrete int |grad u|^p |y|^a dx; see detail::dirichlet_energy for the stencil.
inline double weighted_dirichlet(const GridFunction& u, double p, double a)
{
    detail::check_weight(u.grid(), a);
    return detail::dirichlet_energy(u.grid(), u.values(), detail::cell_weights(u.grid(), a), p);
}

/// Same as weighted_dirichlet with only the d/d|y| differences.
inline double weighted_dirichlet_s(const GridFunction& u, double p, double a)
{
    detail::check_weight(u.grid(), a);
    return detail::dirichlet_energy(u.grid(), u.values(), detail::cell_weights(u.grid(), a), p, 0.0,
                                    detail::Component::SOnly);
}

/// Same as weighted_dirichlet with only the d/d|z| differences (0 when m = 0).
inline double weighted_dirichlet_t(const GridFunction& u, double p, double a)
{
    detail::check_weight(u.grid(), a);
    return detail::dirichlet_energy(u.grid(), u.values(), detail::cell_weights(u.grid(), a), p, 0.0,
                                    detail::Component::TOnly);
}

/// int |grad u|^p |y|^{alpha+p} / int |u|^p |y|^alpha.
inline QuotientReport hardy_quotient(const GridFunction& u, const Params& params)
{
    detail::check_grid(u, params);
    const double num = weighted_dirichlet(u, params.p, params.alpha + params.p);
    const double den = weighted_p_norm(u, params.p, params.alpha);
    return detail::make_report(num, den, u.grid());
}

/// int |u|^q / |y|^beta.
inline double hs_constraint(const GridFunction& u, const Params& params)
{
    if (params.mode != Mode::HardySobolev) {
        throw UsageError("hs_constraint needs Hardy-Sobolev parameters");
    }
    detail::check_grid(u, params);
    if (!(params.beta < params.k)) {
        throw DomainError("beta < k violated");
    }
    return weighted_p_norm(u, params.q, -params.beta);
}

/// int |grad u|^p / (int |u|^q / |y|^beta)^{p/q}; invariant under u -> c u.
inline QuotientReport hs_quotient(const GridFunction& u, const Params& params)
{
    const double constraint = hs_constraint(u, params);
    if (!(constraint > 0.0)) {
        throw DegenerateInputError("Hardy-Sobolev constraint integral vanishes");
    }
    const double num = weighted_dirichlet(u, params.p, 0.0);
    return detail::make_report(num, std::pow(constraint, params.p / params.q), u.grid());
}

} // namespace hardy
