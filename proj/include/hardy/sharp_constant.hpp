#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "hardy/descent.hpp"
#include "hardy/error.hpp"
#include "hardy/families.hpp"
#include "hardy/functionals.hpp"
#include "hardy/grid.hpp"

namespace hardy {

/// p^p / (alpha + k)^p. The matching quotient infimum is ((alpha + k)/p)^p.
inline double hardy_constant(double p, double alpha, int k)
{
    if (!(p > 1.0)) {
        throw DomainError("hardy_constant needs p > 1");
    }
    if (!(alpha + k > 0.0)) {
        throw DomainError("hardy_constant needs alpha + k > 0");
    }
    return std::pow(p / (alpha + k), p);
}

/// Reciprocal of hardy_constant.
inline double hardy_infimum(double p, double alpha, int k) { return 1.0 / hardy_constant(p, alpha, k); }

/// coef * r^{-exponent} for r > r_max. coef = 0 means compact support.
struct PowerTail {
    double coef = 0.0;
    double exponent = 0.0;
};

/// sigma(d) int_{r_max}^inf (coef r^{-exponent})^p r^a r^{d-1} dr.
inline double tail_correction(const PowerTail& tail, const RadialGrid& grid, double p, double a)
{
    if (tail.coef == 0.0) {
        return 0.0;
    }
    if (grid.degenerate()) {
        throw UsageError("tail_correction needs a radial grid of dimension >= 1");
    }
    const int d = grid.dim();
    const double decay = p * tail.exponent - a - d;
    if (!(decay > 0.0)) {
        throw DomainError("power-law tail is not integrable: p*exponent - a - d = " + detail::fmt_short(decay) +
                          " <= 0");
    }
    const double R = grid.r_max();
    return sphere_area(d) * std::pow(std::abs(tail.coef), p) * std::pow(R, -decay) / decay;
}

/// u(r) = 1 for r <= 1, r^{-c} beyond, with c = (alpha + N)/p + eps.
struct EpsFamily {
    double eps = 0.0;
    double decay = 0.0;
    GridFunction u;
    /// Tails of u and |u'| beyond r_max; the sample itself is truncated there.
    PowerTail value_tail;
    PowerTail gradient_tail;
    bool unbounded_support = true;

    double operator()(double r) const { return r <= 1.0 ? 1.0 : std::pow(r, -decay); }
};

inline EpsFamily eps_family(double eps, const Params& params, const RadialGrid& grid)
{
    if (!(eps > 0.0)) {
        throw DomainError("eps must be positive");
    }
    if (params.k != params.N || grid.dim() != params.N) {
        throw UsageError("eps_family is radial: needs k = N = grid dimension");
    }
    if (!(grid.r_max() >= 1.0)) {
        throw ConfigurationError("eps_family needs r_max >= 1");
    }
    const double c = (params.alpha + params.N) / params.p + eps;
    auto f = [c](double r) { return r <= 1.0 ? 1.0 : std::pow(r, -c); };
    GridFunction u = GridFunction::sample(make_cyl_grid(grid), [&](double s, double) { return f(s); });
    return EpsFamily{eps, c, std::move(u), PowerTail{1.0, c}, PowerTail{c, c + 1.0}, true};
}

/// ((alpha+N)/p + eps)^p (alpha+N) / (alpha+N + p eps), the exact quotient of the eps-family.
inline double eps_quotient_closed_form(double eps, double p, double alpha, int N)
{
    if (!(p > 1.0)) {
        throw DomainError("p > 1 required");
    }
    if (!(alpha + N > 0.0)) {
        throw DomainError("alpha + N > 0 required");
    }
    if (!(eps > 0.0)) {
        throw DomainError("eps must be positive");
    }
    const double a = alpha + N;
    return std::pow(a / p + eps, p) * a / (a + p * eps);
}

/// Hardy quotient of the eps-family sample. With tail_correct the outer
/// boundary value is taken from the tail and the analytic integrals over
/// (r_max, inf) are added to numerator and denominator.
inline QuotientReport eps_quotient(const EpsFamily& fam, const Params& params, bool tail_correct = true)
{
    const GridFunction& u = fam.u;
    detail::check_grid(u, params);
    const CylGrid& g = u.grid();
    const double p = params.p;
    const double a_num = params.alpha + params.p;
    detail::check_weight(g, params.alpha);
    const double outer = tail_correct ? fam(g.s().r_max()) : 0.0;
    double num = detail::dirichlet_energy(g, u.values(), detail::cell_weights(g, a_num), p, 0.0,
                                          detail::Component::Both, nullptr, outer);
    double den = detail::power_sum(u.values(), detail::cell_weights(g, params.alpha), p);
    double num_tail = 0.0;
    double den_tail = 0.0;
    if (tail_correct) {
        num_tail = tail_correction(fam.gradient_tail, g.s(), p, a_num);
        den_tail = tail_correction(fam.value_tail, g.s(), p, params.alpha);
        num += num_tail;
        den += den_tail;
    }
    QuotientReport r = detail::make_report(num, den, g);
    r.tail_corrected = tail_correct;
    r.numerator_tail = num_tail;
    r.denominator_tail = den_tail;
    return r;
}

struct EpsSweepRow {
    double eps = 0.0;
    QuotientReport report;
    double uncorrected = 0.0;
    double closed_form = 0.0;

    /// Shift of the quotient caused by the tail terms.
    double tail_shift() const { return report.value - uncorrected; }
};

inline std::vector<EpsSweepRow> eps_sweep(const Params& params, const std::vector<double>& ladder,
                                          const RadialGrid& grid, bool tail_correct = true)
{
    if (ladder.empty()) {
        throw ValidationError("eps ladder must not be empty");
    }
    std::vector<EpsSweepRow> rows;
    for (double eps : ladder) {
        const EpsFamily fam = eps_family(eps, params, grid);
        EpsSweepRow row;
        row.eps = eps;
        row.report = eps_quotient(fam, params, tail_correct);
        row.uncorrected = tail_correct ? eps_quotient(fam, params, false).value : row.report.value;
        row.closed_form = eps_quotient_closed_form(eps, params.p, params.alpha, params.N);
        rows.push_back(row);
    }
    return rows;
}

/// Default grid for eps sweeps: half the cells on [0, 1], the rest log-spaced to r_max.
inline RadialGridSpec default_eps_grid(int N, int n = 4096, double r_max = 1e3)
{
    return RadialGridSpec{N, r_max, n, Split{1.0}};
}

struct ConvexityBound {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// lhs = (s^2 + t^2)^{p/2}, rhs = (1-lambda)^{1-p} s^p + lambda^{1-p} t^p.
inline ConvexityBound convexity_bound(double s, double t, double lambda, double p)
{
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw DomainError("lambda must lie in (0, 1)");
    }
    if (!(p > 1.0)) {
        throw DomainError("p > 1 required");
    }
    if (!(s >= 0.0) || !(t >= 0.0)) {
        throw DomainError("s and t must be nonnegative");
    }
    return {std::pow(s * s + t * t, 0.5 * p),
            std::pow(1.0 - lambda, 1.0 - p) * std::pow(s, p) + std::pow(lambda, 1.0 - p) * std::pow(t, p)};
}

/// A radial profile with support [0, support] (infinite when unbounded).
struct RadialProfile {
    std::function<double(double)> f;
    double support = std::numeric_limits<double>::infinity();
};

/// u(s, t) = v(s) w(t / lambda_scale) sampled at cell nodes.
inline GridFunction product_family(const RadialProfile& v, const RadialProfile& w, double lambda_scale, CylGridPtr grid)
{
    if (grid->t().degenerate()) {
        throw UsageError("product_family needs m >= 1");
    }
    if (!(lambda_scale > 0.0)) {
        throw DomainError("lambda_scale must be positive");
    }
    if (!std::isfinite(w.support)) {
        throw ConfigurationError("the z-profile must have compact support");
    }
    if (lambda_scale * w.support > grid->t().r_max() * (1.0 + 1e-12)) {
        throw ConfigurationError("scaled z-support " + detail::fmt_short(lambda_scale * w.support) +
                                 " exceeds t r_max " + detail::fmt_short(grid->t().r_max()));
    }
    if (v.support > grid->s().r_max() * (1.0 + 1e-12)) {
        throw ConfigurationError("y-support exceeds s r_max");
    }
    return GridFunction::sample(std::move(grid), [&](double s, double t) { return v.f(s) * w.f(t / lambda_scale); });
}

/// The two sides of the lambda-split bound for a product u = v w:
/// quotient <= (1-lambda)^{1-p} R_k[v] + lambda^{1-p} R_z[w] M[v], where
/// R_k[v] = int |grad_y v|^p |y|^{alpha+p} / int |v|^p |y|^alpha,
/// R_z[w] = int |grad w|^p / int |w|^p and M[v] = int |v|^p |y|^{alpha+p} / int |v|^p |y|^alpha.
/// Each term is evaluated with the same stencil as the quotient, so the bound
/// holds exactly at the discrete level.
struct ProductSplit {
    double quotient = 0.0;
    double R_k = 0.0;
    double R_z = 0.0;
    double M = 0.0;
    double rhs = 0.0;
};

inline ProductSplit product_split(const GridFunction& u, const Params& params, double lambda)
{
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw DomainError("lambda must lie in (0, 1)");
    }
    const double p = params.p;
    const double a = params.alpha;
    const QuotientReport q = hardy_quotient(u, params);
    const double den = q.denominator;
    const double Es = weighted_dirichlet_s(u, p, a + p);
    const double Et = weighted_dirichlet_t(u, p, a + p);
    const double Mnum = weighted_p_norm(u, p, a + p);
    ProductSplit r;
    r.quotient = q.value;
    r.R_k = Es / den;
    r.M = Mnum / den;
    r.R_z = r.M > 0.0 ? Et / Mnum : 0.0;
    r.rhs = std::pow(1.0 - lambda, 1.0 - p) * r.R_k + std::pow(lambda, 1.0 - p) * r.R_z * r.M;
    return r;
}

/// Compactly supported member of the eps-family, written in x = ln(r / rho):
/// 1 for x <= 0, e^{-c x} on [0, T], e^{-c x} (1 - (x - T)/Tc) on [T, T + Tc],
/// 0 beyond. rho is chosen so the support ends at `support`. With
/// T = max(1, 2/(p eps)) the truncation error in the quotient is O(e^{-p eps T}).
struct TruncatedEpsFamily {
    double eps = 0.0;
    double c = 0.0;
    double T = 0.0;
    double Tc = 0.0;
    double rho = 0.0;
    double support = 1.0;

    TruncatedEpsFamily(double eps_, double p, double alpha, int k, double support_ = 1.0)
        : eps(eps_), support(support_)
    {
        if (!(eps > 0.0)) {
            throw DomainError("eps must be positive");
        }
        if (!(alpha + k > 0.0) || !(p > 1.0)) {
            throw DomainError("needs p > 1 and alpha + k > 0");
        }
        if (!(support > 0.0)) {
            throw ConfigurationError("support radius must be positive");
        }
        c = (alpha + k) / p + eps;
        T = std::max(1.0, 2.0 / (p * eps));
        Tc = 0.5 * T;
        rho = support * std::exp(-(T + Tc));
    }

    double operator()(double r) const
    {
        if (r <= rho) {
            return 1.0;
        }
        const double x = std::log(r / rho);
        if (x <= T) {
            return std::exp(-c * x);
        }
        if (x < T + Tc) {
            return std::exp(-c * x) * (1.0 - (x - T) / Tc);
        }
        return 0.0;
    }

    RadialProfile profile() const
    {
        return {[f = *this](double r) { return f(r); }, support};
    }

    /// Geometric grid on [0, support] in dimension k resolving the plateau radius rho.
    RadialGrid grid(int k, int n) const
    {
        const double h0 = std::min(rho / 8.0, 0.5 * support / n);
        return make_radial_grid(k, support, n, Geometric{geometric_ratio_for_first_cell(support, n, h0)});
    }
};

struct ProductLadder {
    std::vector<double> eps;
    std::vector<double> lambda;
    int n_s = 2048;
    int n_t = 64;
    double support = 1.0;

    void validate() const
    {
        if (eps.empty() || lambda.empty()) {
            throw ValidationError("eps and lambda ladders must not be empty");
        }
        if (eps.size() != lambda.size()) {
            throw ValidationError("eps and lambda ladders must have equal length");
        }
        if (n_s < 2 || n_t < 2) {
            throw ValidationError("product ladder grids need at least two cells per direction");
        }
    }

    json to_json() const
    {
        return {{"eps", eps}, {"lambda", lambda}, {"n_s", n_s}, {"n_t", n_t}, {"support", support}};
    }
};

struct ProductSweepRow {
    double eps = 0.0;
    double lambda = 0.0;
    QuotientReport report;
    /// Quotient of the y-factor alone (no z-energy).
    double y_quotient = 0.0;
    /// Untruncated eps-family value for k = N.
    double closed_form = 0.0;
    ProductSplit split;
};

/// Hardy quotients of v_eps(|y|) w(|z| / lambda) along the zipped (eps, lambda)
/// ladder, with v_eps the truncated eps-family and w the cos^2 bump.
inline std::vector<ProductSweepRow> product_sweep(const Params& params, const ProductLadder& ladder)
{
    ladder.validate();
    if (params.k >= params.N) {
        throw ValidationError("k < N violated (product sweep needs a z-direction)");
    }
    const int m = params.N - params.k;
    const RadialProfile w{bump_profile, 1.0};
    std::vector<ProductSweepRow> rows;
    for (std::size_t i = 0; i < ladder.eps.size(); ++i) {
        const double eps = ladder.eps[i];
        const double lam = ladder.lambda[i];
        if (!(lam > 0.0)) {
            throw ValidationError("lambda > 0 violated");
        }
        const TruncatedEpsFamily fam(eps, params.p, params.alpha, params.k, ladder.support);
        RadialGrid sg = fam.grid(params.k, ladder.n_s);
        RadialGrid tg = make_radial_grid(m, lam * w.support, ladder.n_t, Uniform{});
        const CylGridPtr grid = make_cyl_grid(sg, tg);
        const GridFunction u = product_family(fam.profile(), w, lam, grid);

        const GridFunction v = GridFunction::sample(make_cyl_grid(sg), [&](double s, double) { return fam(s); });
        const Params py = Params::hardy(params.k, params.k, params.p, params.alpha);

        ProductSweepRow row;
        row.eps = eps;
        row.lambda = lam;
        row.report = hardy_quotient(u, params);
        row.y_quotient = hardy_quotient(v, py).value;
        row.closed_form = eps_quotient_closed_form(eps, params.p, params.alpha, params.k);
        row.split = product_split(u, params, 0.5);
        rows.push_back(row);
    }
    return rows;
}

struct SplitDemoRow {
    double lambda = 0.0;
    double quotient = 0.0;
    double numerator = 0.0;
    double denominator = 0.0;
};

struct SplitDemoResult {
    /// Discrete minimum of int |v'|^p / int |v|^p on the interval.
    double omega_infimum = 0.0;
    bool omega_converged = false;
    std::vector<SplitDemoRow> rows;
};

/// Quotient int |grad u|^p / int |u|^p for u(x1, x2) = v(x1) w(x2 / lambda) on
/// (0, width) x R, with v the discrete minimizer on the interval and w the
/// cos^2 bump. The interval is represented by its symmetric half [0, width/2]
/// with a mirror condition at the midpoint and a zero value at the ends.
inline SplitDemoResult split_infimum_demo(double p, double omega_width, const std::vector<double>& lambda_scales,
                                          int n_s = 256, int n_t = 64, const DescentOptions& opts = {})
{
    if (!(p > 1.0)) {
        throw DomainError("p > 1 required");
    }
    if (!(omega_width > 0.0)) {
        throw ConfigurationError("omega_width must be positive");
    }
    if (lambda_scales.empty()) {
        throw ValidationError("lambda ladder must not be empty");
    }
    const double half = 0.5 * omega_width;
    const RadialGrid sg = make_radial_grid(1, half, n_s, Uniform{});
    const CylGridPtr g1 = make_cyl_grid(sg);
    const GridFunction init =
        GridFunction::sample(g1, [&](double s, double) { return 1.0 - (s / half) * (s / half); });
    const DescentResult v = descend_quotient(*g1, std::vector<double>(init.values().begin(), init.values().end()), p,
                                             p, 0.0, 0.0, opts);

    SplitDemoResult out;
    out.omega_infimum = v.iterations.back().quotient;
    out.omega_converged = v.converged;

    for (double lam : lambda_scales) {
        if (!(lam > 0.0)) {
            throw ValidationError("lambda > 0 violated");
        }
        const RadialGrid tg = make_radial_grid(1, lam, n_t, Uniform{});
        const CylGridPtr g = make_cyl_grid(sg, tg);
        std::vector<double> vals(g->size());
        const auto t = tg.nodes();
        for (std::size_t i = 0; i < g->ns(); ++i) {
            for (std::size_t j = 0; j < g->nt(); ++j) {
                vals[g->index(i, j)] = v.u[i] * bump_profile(t[j] / lam);
            }
        }
        const GridFunction u(g, std::move(vals));
        const double num = weighted_dirichlet(u, p, 0.0);
        const double den = weighted_p_norm(u, p, 0.0);
        out.rows.push_back({lam, num / den, num, den});
    }
    return out;
}

} // namespace hardy
