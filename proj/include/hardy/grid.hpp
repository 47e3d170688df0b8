#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hardy/error.hpp"

namespace hardy {

using json = nlohmann::json;

/// Surface area of the unit sphere in R^d, 2 pi^{d/2} / Gamma(d/2).
inline double sphere_area(int d)
{
    if (d < 1) {
        throw DomainError("sphere_area: dimension must be >= 1");
    }
    // sigma(d + 2) = 2 pi sigma(d) / d, exact in the lowest dimensions
    double area = (d % 2 == 1) ? 2.0 : 2.0 * std::numbers::pi;
    for (int j = (d % 2 == 1) ? 1 : 2; j + 2 <= d; j += 2) {
        area *= 2.0 * std::numbers::pi / j;
    }
    return area;
}

namespace detail {

// hi^x - lo^x without cancellation for thin cells far from the origin.
inline double pow_diff(double lo, double hi, double x)
{
    if (lo <= 0.0) {
        return std::pow(hi, x);
    }
    return std::pow(lo, x) * std::expm1(x * std::log1p((hi - lo) / lo));
}

inline std::string fmt_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt_short(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace detail

// Cell-placement rules for make_radial_grid.
struct Uniform {};
/// Cell widths grow by `ratio` from the origin outward.
struct Geometric {
    double ratio = 1.1;
};
/// Half of the cells uniform on [0, r_break], the rest log-spaced on [r_break, r_max].
struct Split {
    double r_break = 1.0;
};
/// Every cell carries the same measure: e_i = r_max (i/n)^{1/d}.
struct EqualMeasure {};

using Grading = std::variant<Uniform, Geometric, Split, EqualMeasure>;

inline json grading_to_json(const Grading& g)
{
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                return {{"kind", "uniform"}};
            } else if constexpr (std::is_same_v<T, Geometric>) {
                return {{"kind", "geometric"}, {"ratio", v.ratio}};
            } else if constexpr (std::is_same_v<T, Split>) {
                return {{"kind", "split"}, {"r_break", v.r_break}};
            } else {
                return {{"kind", "equal_measure"}};
            }
        },
        g);
}

inline Grading grading_from_json(const json& j)
{
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "uniform") {
        return Uniform{};
    }
    if (kind == "geometric") {
        return Geometric{j.at("ratio").get<double>()};
    }
    if (kind == "split") {
        return Split{j.at("r_break").get<double>()};
    }
    if (kind == "equal_measure") {
        return EqualMeasure{};
    }
    throw ConfigurationError("unknown grading kind '" + kind + "'");
}

inline std::string grading_label(const Grading& g)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                return "uniform";
            } else if constexpr (std::is_same_v<T, Geometric>) {
                return "geometric(" + detail::fmt_short(v.ratio) + ")";
            } else if constexpr (std::is_same_v<T, Split>) {
                return "split(" + detail::fmt_short(v.r_break) + ")";
            } else {
                return "equal_measure";
            }
        },
        g);
}

/// Serializable description of a radial grid (the config-file form).
struct RadialGridSpec {
    int dim = 1;
    double r_max = 1.0;
    int n = 64;
    Grading grading = Uniform{};

    json to_json() const
    {
        return {{"d", dim}, {"r_max", r_max}, {"n", n}, {"grading", grading_to_json(grading)}};
    }

    static RadialGridSpec from_json(const json& j)
    {
        RadialGridSpec s;
        s.dim = j.at("d").get<int>();
        s.r_max = j.at("r_max").get<double>();
        s.n = j.at("n").get<int>();
        s.grading = j.contains("grading") ? grading_from_json(j.at("grading")) : Grading{Uniform{}};
        return s;
    }

    /// Same extent with n doubled `levels` times; geometric ratios are square-rooted per level.
    RadialGridSpec refined(int levels) const
    {
        RadialGridSpec r = *this;
        for (int l = 0; l < levels; ++l) {
            r.n *= 2;
            if (auto* g = std::get_if<Geometric>(&r.grading)) {
                g->ratio = std::sqrt(g->ratio);
            }
        }
        return r;
    }
};

/// Cells [e_{i-1}, e_i] of a ball of radius r_max in R^d, with exact measures
/// sigma(d) * int r^{d-1} dr. The dim-0 "point" grid is a single cell of measure 1.
class RadialGrid {
public:
    static RadialGrid from_edges(int dim, std::vector<double> edges)
    {
        if (dim < 1) {
            throw ConfigurationError("radial grid dimension must be >= 1");
        }
        if (edges.size() < 2 || edges.front() != 0.0) {
            throw ConfigurationError("radial grid edges must start at 0 and contain at least one cell");
        }
        for (std::size_t i = 1; i < edges.size(); ++i) {
            if (!(edges[i] > edges[i - 1]) || !std::isfinite(edges[i])) {
                throw ConfigurationError("radial grid edges must be finite and strictly increasing");
            }
        }
        RadialGrid g;
        g.dim_ = dim;
        g.edges_ = std::move(edges);
        const std::size_t n = g.edges_.size() - 1;
        g.nodes_.resize(n);
        g.measures_.resize(n);
        const double factor = sphere_area(dim) / dim;
        for (std::size_t i = 0; i < n; ++i) {
            const double lo = g.edges_[i];
            const double hi = g.edges_[i + 1];
            g.nodes_[i] = 0.5 * (lo + hi);
            g.measures_[i] = factor * detail::pow_diff(lo, hi, dim);
        }
        return g;
    }

    static RadialGrid point()
    {
        RadialGrid g;
        g.dim_ = 0;
        g.edges_ = {0.0, 0.0};
        g.nodes_ = {0.0};
        g.measures_ = {1.0};
        return g;
    }

    int dim() const { return dim_; }
    bool degenerate() const { return dim_ == 0; }
    std::size_t size() const { return nodes_.size(); }
    double r_max() const { return edges_.back(); }
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> edges() const { return edges_; }
    std::span<const double> measures() const { return measures_; }
    const std::optional<RadialGridSpec>& spec() const { return spec_; }

    double total_measure() const
    {
        double s = 0.0;
        for (double m : measures_) {
            s += m;
        }
        return s;
    }

    /// Cell averages of r^a against r^{d-1} dr. Requires a + d > 0.
    std::vector<double> power_average(double a) const
    {
        std::vector<double> w(size(), 1.0);
        if (degenerate() || a == 0.0) {
            return w;
        }
        const double x = a + dim_;
        if (!(x > 0.0)) {
            throw DomainError("power weight r^" + detail::fmt_short(a) + " is not integrable at the origin in dimension " +
                              std::to_string(dim_));
        }
        for (std::size_t i = 0; i < size(); ++i) {
            const double lo = edges_[i];
            const double hi = edges_[i + 1];
            w[i] = (dim_ / x) * detail::pow_diff(lo, hi, x) / detail::pow_diff(lo, hi, dim_);
        }
        return w;
    }

    json descriptor() const
    {
        if (degenerate()) {
            return {{"d", 0}, {"kind", "point"}};
        }
        if (spec_) {
            return spec_->to_json();
        }
        return {{"d", dim_}, {"r_max", r_max()}, {"n", size()}, {"grading", {{"kind", "custom"}}}};
    }

    std::string label() const
    {
        if (degenerate()) {
            return "point";
        }
        std::string s = "d" + std::to_string(dim_) + ",r" + detail::fmt_short(r_max()) + ",n" + std::to_string(size());
        s += "," + (spec_ ? grading_label(spec_->grading) : std::string("custom"));
        return s;
    }

private:
    friend RadialGrid make_radial_grid(const RadialGridSpec& spec);

    int dim_ = 0;
    std::vector<double> edges_;
    std::vector<double> nodes_;
    std::vector<double> measures_;
    std::optional<RadialGridSpec> spec_;
};

inline RadialGrid make_radial_grid(const RadialGridSpec& spec)
{
    if (spec.dim < 1) {
        throw ConfigurationError("radial grid dimension must be >= 1");
    }
    if (!(spec.r_max > 0.0) || !std::isfinite(spec.r_max)) {
        throw ConfigurationError("r_max must be positive and finite");
    }
    if (spec.n < 1) {
        throw ConfigurationError("a radial grid needs at least one cell");
    }
    const int n = spec.n;
    const double r_max = spec.r_max;
    std::vector<double> e(static_cast<std::size_t>(n) + 1, 0.0);

    std::visit(
        [&](const auto& g) {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                for (int i = 1; i <= n; ++i) {
                    e[i] = r_max * i / n;
                }
            } else if constexpr (std::is_same_v<T, Geometric>) {
                if (!(g.ratio > 0.0) || !std::isfinite(g.ratio)) {
                    throw ConfigurationError("geometric grading ratio must be positive and finite");
                }
                const double L = std::log(g.ratio);
                for (int i = 1; i <= n; ++i) {
                    if (L == 0.0) {
                        e[i] = r_max * i / n;
                    } else if (L > 0.0) {
                        // r_max (rho^i - 1)/(rho^n - 1), arranged to avoid overflow.
                        e[i] = r_max * std::exp((i - n) * L) * std::expm1(-i * L) / std::expm1(-n * L);
                    } else {
                        e[i] = r_max * std::expm1(i * L) / std::expm1(n * L);
                    }
                }
            } else if constexpr (std::is_same_v<T, Split>) {
                if (!(g.r_break > 0.0) || !(g.r_break < r_max)) {
                    throw ConfigurationError("split grading needs 0 < r_break < r_max");
                }
                if (n < 2) {
                    throw ConfigurationError("split grading needs at least two cells");
                }
                const int inner = n / 2;
                const int outer = n - inner;
                for (int i = 1; i <= inner; ++i) {
                    e[i] = g.r_break * i / inner;
                }
                const double span = std::log(r_max / g.r_break);
                for (int j = 1; j <= outer; ++j) {
                    e[inner + j] = g.r_break * std::exp(span * j / outer);
                }
            } else {
                for (int i = 1; i <= n; ++i) {
                    e[i] = r_max * std::pow(static_cast<double>(i) / n, 1.0 / spec.dim);
                }
            }
        },
        spec.grading);
    e[n] = r_max;

    RadialGrid grid = RadialGrid::from_edges(spec.dim, std::move(e));
    grid.spec_ = spec;
    return grid;
}

inline RadialGrid make_radial_grid(int d, double r_max, int n, Grading grading = Uniform{})
{
    return make_radial_grid(RadialGridSpec{d, r_max, n, grading});
}

/// Ratio of the geometric grading on [0, r_max] with n cells whose first cell has width h0.
inline double geometric_ratio_for_first_cell(double r_max, int n, double h0)
{
    if (!(h0 > 0.0) || !(h0 <= r_max / n)) {
        throw ConfigurationError("first cell width must lie in (0, r_max/n]");
    }
    // first width as a function of L = log(ratio) is decreasing; bisect in L.
    auto first = [&](double L) {
        if (L == 0.0) {
            return r_max / n;
        }
        return r_max * std::exp(-(n - 1) * L) * (-std::expm1(-L)) / (-std::expm1(-n * L));
    };
    double lo = 0.0;
    double hi = 1.0;
    while (first(hi) > h0) {
        hi *= 2.0;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (first(mid) > h0 ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

/// Product of a radial grid in |y| (dimension k) and one in |z| (dimension m = N - k).
/// Cell (i, j) has measure m^s_i * m^t_j; values are stored row-major, index i * nt + j.
class CylGrid {
public:
    CylGrid(RadialGrid s, RadialGrid t) : s_(std::move(s)), t_(std::move(t))
    {
        if (s_.degenerate()) {
            throw ConfigurationError("the |y| factor of a cylindrical grid must have k >= 1");
        }
    }

    /// m = 0 case: a radial function of |y| only.
    explicit CylGrid(RadialGrid s) : CylGrid(std::move(s), RadialGrid::point()) {}

    int k() const { return s_.dim(); }
    int m() const { return t_.dim(); }
    int N() const { return k() + m(); }
    const RadialGrid& s() const { return s_; }
    const RadialGrid& t() const { return t_; }
    std::size_t ns() const { return s_.size(); }
    std::size_t nt() const { return t_.size(); }
    std::size_t size() const { return ns() * nt(); }
    std::size_t index(std::size_t i, std::size_t j) const { return i * nt() + j; }
    double measure(std::size_t i, std::size_t j) const { return s_.measures()[i] * t_.measures()[j]; }

    std::vector<double> cell_measures() const
    {
        std::vector<double> m(size());
        for (std::size_t i = 0; i < ns(); ++i) {
            for (std::size_t j = 0; j < nt(); ++j) {
                m[index(i, j)] = measure(i, j);
            }
        }
        return m;
    }

    json descriptor() const { return {{"k", k()}, {"m", m()}, {"s", s_.descriptor()}, {"t", t_.descriptor()}}; }
    std::string label() const { return "s[" + s_.label() + "]t[" + t_.label() + "]"; }

private:
    RadialGrid s_;
    RadialGrid t_;
};

using CylGridPtr = std::shared_ptr<const CylGrid>;

inline CylGridPtr make_cyl_grid(RadialGrid s, RadialGrid t = RadialGrid::point())
{
    return std::make_shared<const CylGrid>(std::move(s), std::move(t));
}

/// Nonnegative cell values of a function of (|y|, |z|).
class GridFunction {
public:
    GridFunction(CylGridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values))
    {
        if (!grid_) {
            throw UsageError("grid function without a grid");
        }
        if (values_.size() != grid_->size()) {
            throw UsageError("grid function has " + std::to_string(values_.size()) + " values for " +
                             std::to_string(grid_->size()) + " cells");
        }
        for (double v : values_) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw DomainError("grid function values must be finite and nonnegative");
            }
        }
    }

    template <class F>
    static GridFunction sample(CylGridPtr grid, F&& f)
    {
        std::vector<double> v(grid->size());
        const auto s = grid->s().nodes();
        const auto t = grid->t().nodes();
        for (std::size_t i = 0; i < s.size(); ++i) {
            for (std::size_t j = 0; j < t.size(); ++j) {
                v[grid->index(i, j)] = f(s[i], t[j]);
            }
        }
        return GridFunction(std::move(grid), std::move(v));
    }

    const CylGrid& grid() const { return *grid_; }
    const CylGridPtr& grid_ptr() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double at(std::size_t i, std::size_t j) const { return values_[grid_->index(i, j)]; }
    double max() const { return *std::max_element(values_.begin(), values_.end()); }

    GridFunction scaled(double c) const
    {
        std::vector<double> v = values_;
        for (double& x : v) {
            x *= c;
        }
        return GridFunction(grid_, std::move(v));
    }

private:
    CylGridPtr grid_;
    std::vector<double> values_;
};

inline double integrate(const RadialGrid& grid, std::span<const double> cell_values)
{
    if (cell_values.size() != grid.size()) {
        throw UsageError("integrate: value count does not match cell count");
    }
    const auto m = grid.measures();
    double sum = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        sum += cell_values[i] * m[i];
    }
    return sum;
}

inline double integrate(const CylGrid& grid, std::span<const double> cell_values)
{
    if (cell_values.size() != grid.size()) {
        throw UsageError("integrate: value count does not match cell count");
    }
    const auto ms = grid.s().measures();
    const auto mt = grid.t().measures();
    double sum = 0.0;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < mt.size(); ++j) {
            row += cell_values[grid.index(i, j)] * mt[j];
        }
        sum += row * ms[i];
    }
    return sum;
}

inline double integrate(const GridFunction& u) { return integrate(u.grid(), u.values()); }

struct Gradient {
    std::vector<double> ds;
    std::vector<double> dt;
};

namespace detail {

// Derivative at nodes of a 1D line with a mirror ghost at the origin and a
// zero value at r_max. Three-point formula on the nonuniform stencil, exact for
// quadratics away from the two boundaries.
inline void centered_line(std::span<const double> r, double r_max, const double* u, std::size_t stride,
                          double* out)
{
    const std::size_t n = r.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double x0 = r[i];
        const double f0 = u[i * stride];
        const double xm = i > 0 ? r[i - 1] : -r[0];
        const double fm = i > 0 ? u[(i - 1) * stride] : f0;
        const double xp = i + 1 < n ? r[i + 1] : r_max;
        const double fp = i + 1 < n ? u[(i + 1) * stride] : 0.0;
        const double hm = x0 - xm;
        const double hp = xp - x0;
        out[i * stride] = (hm * hm * fp - hp * hp * fm + (hp * hp - hm * hm) * f0) / (hm * hp * (hm + hp));
    }
}

} // namespace detail

/// Centered finite-difference gradient (d_s u, d_t u) at cell nodes. Neumann at
/// s = 0 and t = 0, homogeneous Dirichlet at the outer radius.
inline Gradient gradient(const GridFunction& u)
{
    const CylGrid& g = u.grid();
    Gradient out{std::vector<double>(g.size(), 0.0), std::vector<double>(g.size(), 0.0)};
    if (g.ns() < 2) {
        throw UsageError("gradient: the s direction needs at least two cells");
    }
    if (!g.t().degenerate() && g.nt() < 2) {
        throw UsageError("gradient: the t direction needs at least two cells");
    }
    const double* v = u.values().data();
    for (std::size_t j = 0; j < g.nt(); ++j) {
        detail::centered_line(g.s().nodes(), g.s().r_max(), v + j, g.nt(), out.ds.data() + j);
    }
    if (!g.t().degenerate()) {
        for (std::size_t i = 0; i < g.ns(); ++i) {
            detail::centered_line(g.t().nodes(), g.t().r_max(), v + i * g.nt(), 1, out.dt.data() + i * g.nt());
        }
    }
    return out;
}

/// Forward and backward differences per cell. The backward difference at the
/// first node is 0 (mirror ghost); the forward difference at the last node runs
/// to the boundary value at r_max (s_outer in s, 0 in t). All t differences
/// vanish when m = 0.
struct OneSidedDifferences {
    std::vector<double> s_fwd, s_bwd, t_fwd, t_bwd;
};

inline OneSidedDifferences one_sided_differences(const CylGrid& g, std::span<const double> u, double s_outer = 0.0)
{
    if (u.size() != g.size()) {
        throw UsageError("one_sided_differences: value count does not match cell count");
    }
    const std::size_t ns = g.ns();
    const std::size_t nt = g.nt();
    OneSidedDifferences d;
    d.s_fwd.assign(g.size(), 0.0);
    d.s_bwd.assign(g.size(), 0.0);
    d.t_fwd.assign(g.size(), 0.0);
    d.t_bwd.assign(g.size(), 0.0);
    const auto rs = g.s().nodes();
    const double Rs = g.s().r_max();
    for (std::size_t i = 0; i < ns; ++i) {
        const double hf = i + 1 < ns ? rs[i + 1] - rs[i] : Rs - rs[i];
        const double hb = i > 0 ? rs[i] - rs[i - 1] : 1.0;
        for (std::size_t j = 0; j < nt; ++j) {
            const std::size_t c = i * nt + j;
            const double next = i + 1 < ns ? u[c + nt] : s_outer;
            d.s_fwd[c] = (next - u[c]) / hf;
            d.s_bwd[c] = i > 0 ? (u[c] - u[c - nt]) / hb : 0.0;
        }
    }
    if (!g.t().degenerate()) {
        const auto rt = g.t().nodes();
        const double Rt = g.t().r_max();
        for (std::size_t j = 0; j < nt; ++j) {
            const double hf = j + 1 < nt ? rt[j + 1] - rt[j] : Rt - rt[j];
            const double hb = j > 0 ? rt[j] - rt[j - 1] : 1.0;
            for (std::size_t i = 0; i < ns; ++i) {
                const std::size_t c = i * nt + j;
                const double next = j + 1 < nt ? u[c + 1] : 0.0;
                d.t_fwd[c] = (next - u[c]) / hf;
                d.t_bwd[c] = j > 0 ? (u[c] - u[c - 1]) / hb : 0.0;
            }
        }
    }
    return d;
}

/// CSV export: s, t, value, cell_measure.
inline void write_csv(std::ostream& os, const GridFunction& u)
{
    const CylGrid& g = u.grid();
    os << "s,t,value,cell_measure\n";
    const auto s = g.s().nodes();
    const auto t = g.t().nodes();
    for (std::size_t i = 0; i < g.ns(); ++i) {
        for (std::size_t j = 0; j < g.nt(); ++j) {
            os << detail::fmt_double(s[i]) << ',' << detail::fmt_double(t[j]) << ','
               << detail::fmt_double(u.at(i, j)) << ',' << detail::fmt_double(g.measure(i, j)) << '\n';
        }
    }
}

} // namespace hardy
