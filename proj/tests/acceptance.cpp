// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "hardy/experiments.hpp"
#include "hardy/minimizer.hpp"
#include "hardy/sharp_constant.hpp"
#include "oracle.hpp"

using namespace hardy;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const char* title, bool ok, double seconds, double budget, const std::string& detail)
{
    const bool in_time = seconds <= budget;
    const bool pass = ok && in_time;
    if (!pass) {
        ++failures;
    }
    std::printf("%s criterion %d: %s | %s | %.2f s (budget %.0f s)%s\n", pass ? "PASS" : "FAIL", id, title,
                detail.c_str(), seconds, budget, in_time ? "" : " over budget");
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void sharp_constant_formula()
{
    const auto t0 = Clock::now();
    const double a = hardy_constant(2.0, 0.0, 3);
    const double b = hardy_constant(2.0, -2.0, 3);
    const bool ok = std::abs(a - 4.0 / 9.0) <= 1e-15 && std::abs(b - 4.0) <= 1e-15;
    report(1, "sharp constant formula", ok, since(t0), 1.0,
           fmt("C(2,0,3)=%.17g C(2,-2,3)=%.17g", a, b));
}

void radial_sharpness()
{
    const auto t0 = Clock::now();
    const Params P = Params::hardy(3, 3, 2.0, 0.0);
    const auto rows = eps_sweep(P, {1.0, 0.5, 0.1, 0.05, 0.01, 1e-3}, make_radial_grid(default_eps_grid(3, 4096, 1e3)));
    double worst = 0.0;
    for (const auto& r : rows) {
        worst = std::max(worst, std::abs(r.report.value / r.closed_form - 1.0));
    }
    const double last = rows.back().report.value;
    const double gap = std::abs(last / 2.25 - 1.0);
    report(2, "eps-family sharpness, k = N", worst <= 0.005 && gap <= 0.01, since(t0), 10.0,
           fmt("max rel. error vs closed form %.2e (tol 5e-3), Q(1e-3)=%.6f, gap to 2.25 %.2e (tol 1e-2)", worst, last,
               gap));
}

void product_sharpness()
{
    const auto t0 = Clock::now();
    const Params P = Params::hardy_sobolev(4, 3, 2.0, 2.0);
    const EndpointSweep e = hardy_endpoint_sweep(P, ProductLadder{{0.5, 0.1, 0.05, 0.01}, {1.0, 4.0, 16.0, 64.0}});
    bool decreasing = true;
    std::string ladder;
    for (std::size_t i = 0; i < e.hs_values.size(); ++i) {
        ladder += fmt("%s%.6f", i ? "," : "", e.hs_values[i]);
        if (i > 0 && !(e.hs_values[i] < e.hs_values[i - 1])) {
            decreasing = false;
        }
    }
    const double best = *std::min_element(e.hs_values.begin(), e.hs_values.end());
    const double gap = (best - e.target) / e.target;
    report(3, "product-family sharpness, k < N", decreasing && std::abs(gap) <= 0.05, since(t0), 60.0,
           fmt("ladder [%s] %s, best %.6f, gap to %.2f %.2e (tol 5e-2)", ladder.c_str(),
               decreasing ? "decreasing" : "NOT decreasing", best, e.target, gap));
}

void convexity()
{
    const auto t0 = Clock::now();
    const ConvexitySuite s = convexity_suite(100000, 4);
    report(4, "convexity bound", s.violations == 0, since(t0), 5.0,
           fmt("%ld samples, %ld violations, max lhs/rhs %.6f", s.samples, s.violations, s.max_ratio));
}

void rearrangement()
{
    const auto t0 = Clock::now();
    const RearrangementSuite s = rearrangement_suite(64, 1000, 5);
    const bool ps = s.ps_slack_fine <= s.ps_slack_coarse / 1.5;
    const bool ok = s.max_equimeasurability_error <= 1e-12 && s.multiset_changes == 0 && s.hl_violations == 0 &&
                    s.idempotence_failures == 0 && ps;
    report(5, "rearrangement suite", ok, since(t0), 60.0,
           fmt("%d trials on 64x64: equimeasurability %.1e, HL violations %ld, idempotence failures %ld, "
               "PS relative slack 64^2=%.3e 128^2=%.3e",
               s.trials, s.max_equimeasurability_error, s.hl_violations, s.idempotence_failures, s.ps_slack_coarse,
               s.ps_slack_fine) +
               (s.ps_slack_coarse == 0.0 && s.ps_slack_fine == 0.0 ? " (energy chain holds with zero slack at both levels)"
                                                                   : ""));
}

void symmetrization()
{
    const auto t0 = Clock::now();
    const Params P = Params::hardy_sobolev(4, 2, 2.0, 1.0);
    const SymmetrizeSuite s = symmetrize_suite(P, equal_measure_grid(2, 2, 4.0, 128), 100, 6);
    const bool ok = s.increases == 0 && s.max_relative_slack < 0.02;
    report(6, "symmetrization never raises the quotient", ok, since(t0), 120.0,
           fmt("%d trials on 128x128: increases %ld, max relative slack %.3e (tol 2e-2)", s.trials, s.increases,
               s.max_relative_slack));
}

void minimizer()
{
    const auto t0 = Clock::now();
    const Params P = Params::hardy_sobolev(4, 2, 2.0, 1.0);
    double lo = INFINITY;
    double hi = -INFINITY;
    double worst_residual = 0.0;
    double worst_deviation = 0.0;
    int converged = 0;
    int monotone = 0;
    int runs = 0;
    for (int refine : {0, 1}) {
        const CylGridPtr g = default_minimizer_grid(P, 64, 8.0, 1.1, refine);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const MinimizationTrace tr = minimize_hs(P, perturbed_init(g, seed));
            ++runs;
            converged += tr.converged;
            monotone += tr.monotone();
            lo = std::min(lo, tr.final_quotient);
            hi = std::max(hi, tr.final_quotient);
            worst_residual = std::max(worst_residual, tr.constraint_residual);
            worst_deviation = std::max(worst_deviation, tr.final_symmetry_deviation);
        }
    }
    const double spread = (hi - lo) / lo;
    const bool ok = converged == runs && monotone == runs && worst_residual <= 1e-8 && spread <= 0.02 && worst_deviation <= 1e-4;
    report(7, "minimizer self-consistency", ok, since(t0), 300.0,
           fmt("%d runs (5 seeds x 64^2, 128^2): converged %d, monotone %d, quotients [%.6f, %.6f] spread %.2e, "
               "max residual %.1e, max symmetry deviation %.1e",
               runs, converged, monotone, lo, hi, spread, worst_residual, worst_deviation));
}

void splitting()
{
    const auto t0 = Clock::now();
    const double coarse = oracle::second_difference_eigenvalue(2000);
    const double fine = oracle::second_difference_eigenvalue(4000);
    const SplitDemoResult r = split_infimum_demo(2.0, 1.0, {1.0, 4.0, 16.0, 64.0});
    const double last = r.rows.back().quotient;
    const double gap = std::abs(last / fine - 1.0);
    report(8, "splitting demo", gap <= 0.02, since(t0), 10.0,
           fmt("quotient at lambda=64 %.6f, eigenvalue oracle %.6f (M=2000: %.6f), gap %.2e (tol 2e-2)", last, fine,
               coarse, gap));
}

} // namespace

int main()
{
    sharp_constant_formula();
    radial_sharpness();
    product_sharpness();
    convexity();
    rearrangement();
    symmetrization();
    minimizer();
    splitting();
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
