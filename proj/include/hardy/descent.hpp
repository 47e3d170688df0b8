#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "hardy/error.hpp"
#include "hardy/functionals.hpp"
#include "hardy/grid.hpp"
#include "hardy/rearrange.hpp"

namespace hardy {

struct DescentOptions {
    /// Stop once the relative quotient decrease of an accepted step drops below tol.
    double tol = 1e-9;
    int max_iterations = 5000;
    double tau0 = 1.0;
    int max_halvings = 40;
    /// Apply the inverse of the p = 2 energy matrix to the gradient (a Sobolev gradient).
    bool precondition = true;
    /// delta = delta_scale * grid diameter regularizes |grad u|^{p-2} when p != 2.
    double delta_scale = 1e-8;

    json to_json() const
    {
        return {{"tol", tol},
                {"max_iterations", max_iterations},
                {"tau0", tau0},
                {"max_halvings", max_halvings},
                {"precondition", precondition},
                {"delta_scale", delta_scale}};
    }
};

struct IterationRecord {
    double energy = 0.0;
    double constraint = 0.0;
    double quotient = 0.0;
    double step = 0.0;
    /// symmetry_deviation of the iterate (0 for a double-star fixed point).
    double symmetry_deviation = 0.0;
};

struct DescentResult {
    std::vector<IterationRecord> iterations;
    std::vector<double> u;
    bool converged = false;
    std::string stop_reason;
    double delta = 0.0;
};

namespace detail {

// Matrix A with u^T A u equal to dirichlet_energy(g, u, weights, 2).
inline Eigen::SparseMatrix<double> quadratic_energy_matrix(const CylGrid& g, std::span<const double> weights)
{
    const std::size_t ns = g.ns();
    const std::size_t nt = g.nt();
    const bool has_t = !g.t().degenerate();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(g.size() * (has_t ? 12 : 6));
    auto pair = [&](std::size_t a, std::size_t b, double c) {
        trips.emplace_back(a, a, c);
        trips.emplace_back(b, b, c);
        trips.emplace_back(a, b, -c);
        trips.emplace_back(b, a, -c);
    };
    const auto rs = g.s().nodes();
    const double Rs = g.s().r_max();
    for (std::size_t i = 0; i < ns; ++i) {
        const double hf = i + 1 < ns ? rs[i + 1] - rs[i] : Rs - rs[i];
        const double hb = i > 0 ? rs[i] - rs[i - 1] : 1.0;
        for (std::size_t j = 0; j < nt; ++j) {
            const std::size_t c = g.index(i, j);
            const double w = 0.5 * weights[c];
            if (i + 1 < ns) {
                pair(c, c + nt, w / (hf * hf));
            } else {
                trips.emplace_back(c, c, w / (hf * hf));
            }
            if (i > 0) {
                pair(c, c - nt, w / (hb * hb));
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
                const std::size_t c = g.index(i, j);
                const double w = 0.5 * weights[c];
                if (j + 1 < nt) {
                    pair(c, c + 1, w / (hf * hf));
                } else {
                    trips.emplace_back(c, c, w / (hf * hf));
                }
                if (j > 0) {
                    pair(c, c - 1, w / (hb * hb));
                }
            }
        }
    }
    Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

inline double grid_diameter(const CylGrid& g)
{
    const double rs = g.s().r_max();
    const double rt = g.t().degenerate() ? 0.0 : g.t().r_max();
    return std::hypot(rs, rt);
}

} // namespace detail

/// Minimizes E(u) / C(u)^{p/q} over nonnegative grid functions, where
/// E(u) = sum |grad u|^p <s^energy_a> m and C(u) = sum u^q <s^constraint_a> m.
///
/// Every iterate is rescaled to C = 1. The search direction is the gradient of
/// the quotient at C = 1, grad E - (p/q) E grad C, optionally preconditioned by
/// the p = 2 energy matrix. Steps u <- |u - tau d| are accepted only if the
/// quotient does not increase; tau is halved from tau0 up to max_halvings times.
inline DescentResult descend_quotient(const CylGrid& g, std::vector<double> u, double p, double q, double energy_a,
                                      double constraint_a, const DescentOptions& opts = {})
{
    if (u.size() != g.size()) {
        throw UsageError("descend_quotient: init does not match the grid");
    }
    if (!(p > 1.0) || !(q > 0.0)) {
        throw DomainError("descend_quotient needs p > 1 and q > 0");
    }
    detail::check_weight(g, energy_a);
    detail::check_weight(g, constraint_a);
    for (double& x : u) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw DomainError("descend_quotient: init must be finite and nonnegative");
        }
    }
    const std::vector<double> We = detail::cell_weights(g, energy_a);
    const std::vector<double> Wc = detail::cell_weights(g, constraint_a);

    DescentResult result;
    result.delta = p == 2.0 ? 0.0 : opts.delta_scale * detail::grid_diameter(g);
    const double delta = result.delta;

    auto normalize = [&](std::vector<double>& v) {
        const double C = detail::power_sum(v, Wc, q);
        if (!(C > 0.0) || !std::isfinite(C)) {
            return false;
        }
        const double scale = std::pow(C, -1.0 / q);
        for (double& x : v) {
            x *= scale;
        }
        return true;
    };
    auto quotient = [&](double energy, double constraint) { return energy / std::pow(constraint, p / q); };
    auto record = [&](const std::vector<double>& v, double energy, double constraint, double step) {
        IterationRecord r;
        r.energy = energy;
        r.constraint = constraint;
        r.quotient = quotient(energy, constraint);
        r.step = step;
        r.symmetry_deviation = symmetry_deviation(g, v);
        result.iterations.push_back(r);
    };

    if (!normalize(u)) {
        throw DegenerateInputError("initial function has zero constraint integral");
    }

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    if (opts.precondition) {
        solver.compute(detail::quadratic_energy_matrix(g, We));
        if (solver.info() != Eigen::Success) {
            throw ConfigurationError("descend_quotient: preconditioner factorization failed");
        }
    }

    std::vector<double> gradE;
    double E = detail::dirichlet_energy(g, u, We, p, delta, detail::Component::Both, &gradE);
    double C = detail::power_sum(u, Wc, q);
    double Q = quotient(E, C);
    record(u, E, C, 0.0);

    const std::size_t n = u.size();
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    std::vector<double> dir(n);
    std::vector<double> trial(n);
    std::vector<double> trial_grad;
    result.stop_reason = "iteration cap reached";

    for (int it = 0; it < opts.max_iterations; ++it) {
        for (std::size_t c = 0; c < n; ++c) {
            const double x = u[c];
            const double gC = x > 0.0 ? q * std::pow(x, q - 1.0) * Wc[c] : 0.0;
            rhs[static_cast<Eigen::Index>(c)] = gradE[c] - (p / q) * E * gC;
        }
        if (opts.precondition) {
            const Eigen::VectorXd d = solver.solve(rhs);
            for (std::size_t c = 0; c < n; ++c) {
                dir[c] = 0.5 * d[static_cast<Eigen::Index>(c)];
            }
        } else {
            for (std::size_t c = 0; c < n; ++c) {
                dir[c] = rhs[static_cast<Eigen::Index>(c)];
            }
        }

        double tau = opts.tau0;
        bool accepted = false;
        double E_new = 0.0;
        double C_new = 0.0;
        double Q_new = 0.0;
        for (int h = 0; h <= opts.max_halvings; ++h, tau *= 0.5) {
            for (std::size_t c = 0; c < n; ++c) {
                trial[c] = std::abs(u[c] - tau * dir[c]);
            }
            if (!normalize(trial)) {
                continue;
            }
            E_new = detail::dirichlet_energy(g, trial, We, p, delta, detail::Component::Both, &trial_grad);
            C_new = detail::power_sum(trial, Wc, q);
            Q_new = quotient(E_new, C_new);
            if (Q_new <= Q) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            result.stop_reason = "step rejected after " + std::to_string(opts.max_halvings) + " halvings";
            break;
        }
        const double rel = Q > 0.0 ? (Q - Q_new) / Q : 0.0;
        u.swap(trial);
        gradE.swap(trial_grad);
        E = E_new;
        C = C_new;
        Q = Q_new;
        record(u, E, C, tau);
        if (rel < opts.tol) {
            result.converged = true;
            result.stop_reason = "relative quotient change below tolerance";
            break;
        }
    }
    result.u = std::move(u);
    return result;
}

} // namespace hardy
