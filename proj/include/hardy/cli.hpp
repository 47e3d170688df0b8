#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hardy/error.hpp"
#include "hardy/experiments.hpp"
#include "hardy/families.hpp"
#include "hardy/functionals.hpp"
#include "hardy/grid.hpp"
#include "hardy/minimizer.hpp"
#include "hardy/rearrange.hpp"
#include "hardy/sharp_constant.hpp"

namespace hardy::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int {
    kOk = 0,
    kDomain = 1,
    kValidation = 2,
    kDegenerate = 3,
    kIo = 4,
};

inline const std::vector<std::string>& modes()
{
    static const std::vector<std::string> m{"constant", "eps-sweep", "product-sweep", "symmetrize",
                                            "minimize", "split-demo", "properties"};
    return m;
}

/// Built-in configuration of each mode; a config file and flags are merged on top.
inline json default_config(const std::string& mode)
{
    json c{{"mode", mode}, {"seed", 0}, {"out", "."}, {"format", "csv"}, {"refine", 0}};
    if (mode == "constant") {
        c["params"] = {{"p", 2.0}, {"alpha", 0.0}, {"k", 3}};
    } else if (mode == "eps-sweep") {
        c["params"] = {{"N", 3}, {"k", 3}, {"p", 2.0}, {"alpha", 0.0}};
        c["eps"] = {1.0, 0.5, 0.1, 0.05, 0.01, 1e-3};
        c["grid"] = {{"n", 4096}, {"r_max", 1e3}, {"grading", {{"kind", "split"}, {"r_break", 1.0}}}};
        c["tail_correction"] = true;
    } else if (mode == "product-sweep") {
        c["params"] = {{"N", 4}, {"k", 3}, {"p", 2.0}, {"beta", 2.0}};
        c["eps"] = {0.5, 0.1, 0.05, 0.01};
        c["lambda"] = {1.0, 4.0, 16.0, 64.0};
        c["grid"] = {{"n_s", 2048}, {"n_t", 64}, {"support", 1.0}};
    } else if (mode == "symmetrize") {
        c["params"] = {{"N", 4}, {"k", 2}, {"p", 2.0}, {"beta", 1.0}};
        c["trials"] = 100;
        c["grid"] = {{"n", 128}, {"R", 4.0}};
    } else if (mode == "minimize") {
        c["params"] = {{"N", 4}, {"k", 2}, {"p", 2.0}, {"beta", 1.0}};
        c["inits"] = 5;
        c["grid"] = {{"n", 64}, {"R", 8.0}, {"ratio", 1.1}};
        c["descent"] = DescentOptions{}.to_json();
    } else if (mode == "split-demo") {
        c["params"] = {{"p", 2.0}};
        c["omega_width"] = 1.0;
        c["lambda"] = {1.0, 4.0, 16.0, 64.0};
        c["grid"] = {{"n_s", 256}, {"n_t", 64}};
    } else if (mode == "properties") {
        c["samples"] = 100000;
        c["trials"] = 1000;
        c["grid"] = {{"n", 64}, {"R", 4.0}, {"k", 2}, {"m", 2}, {"beta", 1.0}};
    } else {
        throw UsageError("unknown mode '" + mode + "'");
    }
    return c;
}

/// Everything one run needs: the merged configuration tree plus typed accessors.
struct ExperimentConfig {
    std::string mode;
    json tree;

    /// defaults <- file <- overrides, objects merged key by key.
    static ExperimentConfig build(const std::string& mode, const json& file, const json& overrides)
    {
        json t = default_config(mode);
        if (file.contains("mode") && file.at("mode").get<std::string>() != mode) {
            throw ValidationError("config mode '" + file.at("mode").get<std::string>() + "' does not match subcommand '" +
                                  mode + "'");
        }
        t.merge_patch(file);
        t.merge_patch(overrides);
        t["mode"] = mode;
        ExperimentConfig c{mode, std::move(t)};
        c.validate();
        return c;
    }

    std::filesystem::path out_dir() const { return tree.at("out").get<std::string>(); }
    std::string format() const { return tree.at("format").get<std::string>(); }
    int refine() const { return tree.at("refine").get<int>(); }
    std::uint64_t seed() const { return tree.at("seed").get<std::uint64_t>(); }

    /// Params of the mode, validated (throws ValidationError naming the clause).
    Params params() const
    {
        const json& p = tree.at("params");
        auto num = [&](const char* key) {
            if (!p.contains(key)) {
                throw ValidationError(std::string("params.") + key + " missing");
            }
            return p.at(key).get<double>();
        };
        auto integer = [&](const char* key) {
            const double v = num(key);
            if (v != std::floor(v)) {
                throw ValidationError(std::string("params.") + key + " must be an integer");
            }
            return static_cast<int>(v);
        };
        if (mode == "split-demo") {
            return Params::hardy(2, 1, num("p"), 0.0);
        }
        const bool hs = mode == "symmetrize" || mode == "minimize" || (mode == "product-sweep" && p.contains("beta"));
        const int k = integer("k");
        const int N = p.contains("N") ? integer("N") : k;
        if (hs) {
            std::optional<double> q;
            if (p.contains("q") && !p.at("q").is_null()) {
                q = p.at("q").get<double>();
            }
            return Params::hardy_sobolev(N, k, num("p"), num("beta"), q);
        }
        return Params::hardy(N, k, num("p"), num("alpha"));
    }

    std::vector<double> ladder(const char* key) const
    {
        const auto v = tree.at(key).get<std::vector<double>>();
        if (v.empty()) {
            throw ValidationError(std::string(key) + " ladder must not be empty");
        }
        return v;
    }

    void validate() const
    {
        const std::string f = format();
        if (f != "csv" && f != "json") {
            throw ValidationError("format must be csv or json");
        }
        if (refine() < 0) {
            throw ValidationError("refine >= 0 violated");
        }
        const json& seed = tree.at("seed");
        if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<long long>() < 0)) {
            throw ValidationError("seed must be a nonnegative integer");
        }
        if (mode != "properties") {
            params();
        }
        if (mode == "eps-sweep") {
            for (double e : ladder("eps")) {
                if (!(e > 0.0)) {
                    throw ValidationError("eps > 0 violated");
                }
            }
        }
        if (mode == "product-sweep") {
            if (ladder("eps").size() != ladder("lambda").size()) {
                throw ValidationError("eps and lambda ladders must have equal length");
            }
        }
        if (mode == "split-demo") {
            ladder("lambda");
        }
        if (mode == "product-sweep" || mode == "split-demo") {
            for (double l : ladder("lambda")) {
                if (!(l > 0.0)) {
                    throw ValidationError("lambda > 0 violated");
                }
            }
        }
        for (const char* key : {"trials", "inits", "samples"}) {
            if (tree.contains(key) && !(tree.at(key).get<long>() >= 1)) {
                throw ValidationError(std::string(key) + " >= 1 violated");
            }
        }
    }
};

/// Column-oriented table written as CSV or as a versioned JSON document.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;

    void write(const std::filesystem::path& path, const std::string& format) const
    {
        std::ofstream os(path, std::ios::binary);
        if (!os) {
            throw IoError("cannot write " + path.string());
        }
        if (format == "csv") {
            for (std::size_t c = 0; c < columns.size(); ++c) {
                os << (c ? "," : "") << columns[c];
            }
            os << '\n';
            for (const auto& row : rows) {
                for (std::size_t c = 0; c < row.size(); ++c) {
                    os << (c ? "," : "") << cell(row[c]);
                }
                os << '\n';
            }
        } else {
            json doc{{"schema_version", kSchemaVersion}, {"columns", columns}, {"rows", rows}};
            os << doc.dump(2) << '\n';
        }
        if (!os) {
            throw IoError("failed writing " + path.string());
        }
    }

private:
    static std::string cell(const json& v)
    {
        if (v.is_number_float()) {
            return detail::fmt_double(v.get<double>());
        }
        if (v.is_string()) {
            const std::string s = v.get<std::string>();
            if (s.find_first_of(",\"\n") == std::string::npos) {
                return s;
            }
            std::string q = "\"";
            for (char ch : s) {
                q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
            }
            return q + "\"";
        }
        return v.dump();
    }
};

inline void write_json(const std::filesystem::path& path, json doc)
{
    doc["schema_version"] = kSchemaVersion;
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("cannot write " + path.string());
    }
    os << doc.dump(2) << '\n';
    if (!os) {
        throw IoError("failed writing " + path.string());
    }
}

struct RunSummary {
    std::string mode;
    double target = std::nan("");
    double achieved = std::nan("");
    std::string note;

    std::string line() const
    {
        char buf[256];
        if (std::isnan(target)) {
            std::snprintf(buf, sizeof buf, "%s: target=n/a achieved=%.10g", mode.c_str(), achieved);
        } else if (target == 0.0) {
            std::snprintf(buf, sizeof buf, "%s: target=0 achieved=%.10g abs_gap=%.3e", mode.c_str(), achieved,
                          std::abs(achieved));
        } else {
            std::snprintf(buf, sizeof buf, "%s: target=%.10g achieved=%.10g rel_gap=%.3e", mode.c_str(), target,
                          achieved, (achieved - target) / std::abs(target));
        }
        std::string s = buf;
        if (!note.empty()) {
            s += " " + note;
        }
        return s;
    }
};

namespace detail {

inline std::string stem(const std::string& mode)
{
    std::string s = mode;
    for (char& c : s) {
        if (c == '-') {
            c = '_';
        }
    }
    return s;
}

inline std::filesystem::path table_path(const ExperimentConfig& c, const std::string& name)
{
    return c.out_dir() / (name + "." + c.format());
}

inline RunSummary run_constant(const ExperimentConfig& c)
{
    const Params P = c.params();
    const double C = hardy_constant(P.p, P.alpha, P.k);
    Table t{{"p", "alpha", "k", "constant", "infimum"}, {}};
    t.rows.push_back({P.p, P.alpha, P.k, C, 1.0 / C});
    t.write(table_path(c, "constant"), c.format());
    return {"constant", C, C, ""};
}

inline RunSummary run_eps_sweep(const ExperimentConfig& c)
{
    const Params P = c.params();
    if (P.k != P.N) {
        throw ValidationError("k = N violated (eps-sweep is radial)");
    }
    const json& gj = c.tree.at("grid");
    RadialGridSpec spec{P.N, gj.at("r_max").get<double>(), gj.at("n").get<int>(),
                        gj.contains("grading") ? grading_from_json(gj.at("grading")) : Grading{Split{1.0}}};
    const RadialGrid grid = make_radial_grid(spec.refined(c.refine()));
    const bool tail = c.tree.at("tail_correction").get<bool>();
    const auto rows = eps_sweep(P, c.ladder("eps"), grid, tail);

    Table t{{"parameter", "numerator", "denominator", "quotient", "tail_correction", "closed_form", "grid"}, {}};
    const std::string label = grid.label();
    json jrows = json::array();
    for (const auto& r : rows) {
        t.rows.push_back({r.eps, r.report.numerator, r.report.denominator, r.report.value, r.tail_shift(),
                          r.closed_form, label});
        jrows.push_back({{"eps", r.eps}, {"report", r.report.to_json()}, {"closed_form", r.closed_form}});
    }
    t.write(table_path(c, "eps_sweep"), c.format());

    const double target = hardy_infimum(P.p, P.alpha, P.N);
    const auto best = std::min_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.report.value < b.report.value;
    });
    write_json(c.out_dir() / "eps_sweep_summary.json",
               {{"params", P.to_json()},
                {"grid", grid.descriptor()},
                {"target", target},
                {"measured_limit", best->report.value},
                {"measured_limit_eps", best->eps},
                {"rows", jrows}});
    return {"eps-sweep", target, best->report.value, ""};
}

inline RunSummary run_product_sweep(const ExperimentConfig& c)
{
    const Params P = c.params();
    const json& gj = c.tree.at("grid");
    ProductLadder L{c.ladder("eps"), c.ladder("lambda"), gj.at("n_s").get<int>(), gj.at("n_t").get<int>(),
                    gj.at("support").get<double>()};
    L.n_s <<= c.refine();
    L.n_t <<= c.refine();

    std::vector<ProductSweepRow> rows;
    double target = 0.0;
    if (P.mode == Mode::HardySobolev) {
        const EndpointSweep sw = hardy_endpoint_sweep(P, L);
        rows = sw.rows;
        target = sw.target;
    } else {
        rows = product_sweep(P, L);
        target = hardy_infimum(P.p, P.alpha, P.k);
    }

    Table t{{"eps", "lambda", "numerator", "denominator", "quotient", "y_quotient", "closed_form", "split_rhs", "grid"},
            {}};
    bool monotone = true;
    double best = rows.front().report.value;
    json jrows = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (i > 0 && !(r.report.value < rows[i - 1].report.value)) {
            monotone = false;
        }
        best = std::min(best, r.report.value);
        t.rows.push_back({r.eps, r.lambda, r.report.numerator, r.report.denominator, r.report.value, r.y_quotient,
                          r.closed_form, r.split.rhs, r.report.grid.dump()});
        jrows.push_back({{"eps", r.eps},
                         {"lambda", r.lambda},
                         {"report", r.report.to_json()},
                         {"y_quotient", r.y_quotient},
                         {"split",
                          {{"lambda_split", 0.5},
                           {"R_k", r.split.R_k},
                           {"R_z", r.split.R_z},
                           {"M", r.split.M},
                           {"rhs", r.split.rhs}}}});
    }
    t.write(table_path(c, "product_sweep"), c.format());
    write_json(c.out_dir() / "product_sweep_summary.json",
               {{"params", P.to_json()},
                {"ladder", L.to_json()},
                {"target", target},
                {"best", best},
                {"monotone", monotone},
                {"rows", jrows}});
    return {"product-sweep", target, best, monotone ? "monotone=yes" : "monotone=no"};
}

inline RunSummary run_symmetrize(const ExperimentConfig& c)
{
    const Params P = c.params();
    const json& gj = c.tree.at("grid");
    const int n = gj.at("n").get<int>() << c.refine();
    const CylGridPtr g = equal_measure_grid(P.k, P.N - P.k, gj.at("R").get<double>(), n);
    const int trials = c.tree.at("trials").get<int>();
    const SymmetrizeSuite s = symmetrize_suite(P, g, trials, c.seed());

    Table t{{"trial", "seed", "quotient_before", "quotient_after", "energy_before", "energy_after",
             "constraint_before", "constraint_after", "slack"},
            {}};
    for (int i = 0; i < trials; ++i) {
        const auto& r = s.reports[static_cast<std::size_t>(i)];
        t.rows.push_back({i, c.seed() + static_cast<std::uint64_t>(i), r.quotient_before, r.quotient_after,
                          r.energy_before, r.energy_after, r.constraint_before, r.constraint_after, r.slack});
    }
    t.write(table_path(c, "symmetrize"), c.format());
    json summary = s.summary();
    summary["params"] = P.to_json();
    summary["grid"] = g->descriptor();
    write_json(c.out_dir() / "symmetrize_summary.json", summary);
    return {"symmetrize", 0.0, s.max_relative_slack, "(max relative slack)"};
}

inline RunSummary run_minimize(const ExperimentConfig& c)
{
    const Params P = c.params();
    const json& gj = c.tree.at("grid");
    const CylGridPtr g = default_minimizer_grid(P, gj.at("n").get<int>(), gj.at("R").get<double>(),
                                                gj.at("ratio").get<double>(), c.refine());
    MinimizeOptions opts;
    const json& dj = c.tree.at("descent");
    opts.descent.tol = dj.value("tol", opts.descent.tol);
    opts.descent.max_iterations = dj.value("max_iterations", opts.descent.max_iterations);
    opts.descent.tau0 = dj.value("tau0", opts.descent.tau0);
    opts.descent.max_halvings = dj.value("max_halvings", opts.descent.max_halvings);
    opts.descent.precondition = dj.value("precondition", opts.descent.precondition);
    opts.descent.delta_scale = dj.value("delta_scale", opts.descent.delta_scale);

    const int inits = c.tree.at("inits").get<int>();
    Table t{{"init", "seed", "iterations", "converged", "final_quotient", "constraint_residual",
             "symmetry_deviation", "closure_violations", "t_argmax", "grid"},
            {}};
    double lo = INFINITY;
    double hi = -INFINITY;
    json runs = json::array();
    for (int i = 0; i < inits; ++i) {
        const std::uint64_t seed = c.seed() + static_cast<std::uint64_t>(i);
        const MinimizationTrace tr = minimize_hs(P, perturbed_init(g, seed), opts);
        const std::string name = "minimize_trace_" + std::to_string(i);
        json tj = tr.to_json();
        tj["seed"] = seed;
        tj["options"] = opts.to_json();
        write_json(c.out_dir() / (name + ".json"), tj);
        std::ofstream fcsv(c.out_dir() / ("minimize_final_" + std::to_string(i) + ".csv"), std::ios::binary);
        if (!fcsv) {
            throw IoError("cannot write final function for init " + std::to_string(i));
        }
        write_csv(fcsv, tr.final_u);
        t.rows.push_back({i, seed, tr.iterations.size() - 1, tr.converged ? 1 : 0, tr.final_quotient,
                          tr.constraint_residual, tr.final_symmetry_deviation, tr.closure_violations, tr.t_argmax,
                          g->label()});
        lo = std::min(lo, tr.final_quotient);
        hi = std::max(hi, tr.final_quotient);
        runs.push_back({{"seed", seed},
                        {"final_quotient", tr.final_quotient},
                        {"converged", tr.converged},
                        {"monotone", tr.monotone()},
                        {"stop_reason", tr.stop_reason}});
    }
    t.write(table_path(c, "minimize"), c.format());
    write_json(c.out_dir() / "minimize_summary.json",
               {{"params", P.to_json()}, {"grid", g->descriptor()}, {"runs", runs}, {"spread", (hi - lo) / lo}});
    char note[96];
    std::snprintf(note, sizeof note, "spread=%.3e over %d inits", (hi - lo) / lo, inits);
    return {"minimize", std::nan(""), lo, note};
}

inline RunSummary run_split_demo(const ExperimentConfig& c)
{
    const Params P = c.params();
    const json& gj = c.tree.at("grid");
    const double width = c.tree.at("omega_width").get<double>();
    const SplitDemoResult r = split_infimum_demo(P.p, width, c.ladder("lambda"), gj.at("n_s").get<int>() << c.refine(),
                                                 gj.at("n_t").get<int>() << c.refine());
    Table t{{"lambda", "numerator", "denominator", "quotient"}, {}};
    json jrows = json::array();
    for (const auto& row : r.rows) {
        t.rows.push_back({row.lambda, row.numerator, row.denominator, row.quotient});
        jrows.push_back({{"lambda", row.lambda}, {"quotient", row.quotient}});
    }
    t.write(table_path(c, "split_demo"), c.format());
    write_json(c.out_dir() / "split_demo_summary.json",
               {{"p", P.p},
                {"omega_width", width},
                {"omega_infimum", r.omega_infimum},
                {"omega_converged", r.omega_converged},
                {"rows", jrows}});
    return {"split-demo", r.omega_infimum, r.rows.back().quotient, ""};
}

inline RunSummary run_properties(const ExperimentConfig& c)
{
    const json& gj = c.tree.at("grid");
    const ConvexitySuite conv = convexity_suite(c.tree.at("samples").get<long>(), c.seed());
    const RearrangementSuite rs =
        rearrangement_suite(gj.at("n").get<int>() << c.refine(), c.tree.at("trials").get<int>(), c.seed(),
                            gj.at("k").get<int>(), gj.at("m").get<int>(), gj.at("R").get<double>(),
                            gj.at("beta").get<double>());
    write_json(c.out_dir() / "properties.json", {{"convexity", conv.to_json()}, {"rearrangement", rs.to_json()}});
    const long failures = conv.violations + rs.hl_violations + rs.monotone_weight_violations +
                          rs.idempotence_failures + rs.multiset_changes + rs.row_monotonicity_failures;
    return {"properties", 0.0, static_cast<double>(failures), "(total violations)"};
}

} // namespace detail

/// Runs one experiment and writes its artifacts into the (existing) output directory.
inline RunSummary run(const ExperimentConfig& c)
{
    const auto out = c.out_dir();
    if (!std::filesystem::is_directory(out)) {
        throw IoError("output directory does not exist: " + out.string());
    }
    if (c.mode == "constant") {
        return detail::run_constant(c);
    }
    if (c.mode == "eps-sweep") {
        return detail::run_eps_sweep(c);
    }
    if (c.mode == "product-sweep") {
        return detail::run_product_sweep(c);
    }
    if (c.mode == "symmetrize") {
        return detail::run_symmetrize(c);
    }
    if (c.mode == "minimize") {
        return detail::run_minimize(c);
    }
    if (c.mode == "split-demo") {
        return detail::run_split_demo(c);
    }
    if (c.mode == "properties") {
        return detail::run_properties(c);
    }
    throw UsageError("unknown mode '" + c.mode + "'");
}

inline json load_config_file(const std::string& path)
{
    std::ifstream is(path);
    if (!is) {
        throw IoError("cannot read config " + path);
    }
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
}

/// Builds, runs and reports; maps errors to exit codes.
inline int run_guarded(const std::string& mode, const json& file, const json& overrides, std::ostream& out,
                       std::ostream& err)
{
    try {
        const ExperimentConfig c = ExperimentConfig::build(mode, file, overrides);
        out << run(c).line() << '\n';
        return kOk;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << '\n';
        return kValidation;
    } catch (const ConfigurationError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kValidation;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kValidation;
    } catch (const DegenerateInputError& e) {
        err << "degenerate input: " << e.what() << '\n';
        return kDegenerate;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return kDomain;
    } catch (const json::exception& e) {
        err << "validation error: malformed config: " << e.what() << '\n';
        return kValidation;
    }
}

} // namespace hardy::cli
