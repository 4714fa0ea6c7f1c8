#pragma once

// velliptic command-line tool. run() is the whole program minus process
// plumbing, so tests drive it in-process with string streams.
//
// Expression grammar for structure and section fields:
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | 'x' | 'y' | 'pi' | name | func '(' expr ')' | '(' expr ')'
//   func   := sqrt | exp | log | sin | cos
//
// Names are bound from the "params" object next to the expression. Partials
// are taken symbolically; an exponent that depends on x or y is rejected.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli_config.hpp"
#include "cli_selftest.hpp"
#include "velliptic/velliptic.hpp"

namespace velliptic::cli {

enum ExitStatus : int {
    exit_ok = 0,
    exit_tolerance = 2,
    exit_config = 3,
    exit_domain = 4,
};

inline int exit_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::parse_error:
        case ErrorCode::invalid_argument:
        case ErrorCode::missing_derivatives:
        case ErrorCode::fiber_mismatch:
            return exit_config;
        case ErrorCode::non_convergence:
        case ErrorCode::quadrature_failure:
            return exit_tolerance;
        case ErrorCode::out_of_domain:
        case ErrorCode::ellipticity_violation:
        case ErrorCode::parabolic_degeneracy:
        case ErrorCode::non_invertible:
        case ErrorCode::not_rigid:
        case ErrorCode::not_integrable:
        case ErrorCode::crossing_detected:
        case ErrorCode::not_parabolic:
            return exit_domain;
    }
    return exit_config;
}

/// %.17g, with nan and inf spelled out.
inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json element_json(const AlgebraElement& e) { return {{"u", e.u}, {"v", e.v}}; }
inline json complex_json(cplx c) { return {{"re", c.real()}, {"im", c.imag()}}; }
inline json point_json(Point p) { return json::array({p.x, p.y}); }

namespace detail {

inline std::string scalar_text(const json& v) {
    if (v.is_number_float()) return fmt(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "nan";
    if (v.is_array()) {
        std::string s;
        for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + scalar_text(v[k]);
        return s;
    }
    return v.dump();
}

inline void flatten(const json& v, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    if (v.is_object()) {
        for (const auto& [k, e] : v.items()) flatten(e, prefix.empty() ? k : prefix + "." + k, out);
    } else {
        out.emplace_back(prefix, scalar_text(v));
    }
}

inline bool is_table(const json& v) { return v.is_array() && !v.empty() && v[0].is_object(); }

}  // namespace detail

/// Text form of a record: one key=value line per scalar, nested objects with
/// dotted keys, and arrays of objects as one line of key=value pairs per row.
inline void write_text(std::ostream& os, const json& rec) {
    for (const auto& [key, v] : rec.items()) {
        if (detail::is_table(v)) {
            for (const json& row : v) {
                std::vector<std::pair<std::string, std::string>> cells;
                detail::flatten(row, "", cells);
                os << key;
                for (const auto& [k, s] : cells) os << ' ' << k << '=' << s;
                os << '\n';
            }
        } else {
            std::vector<std::pair<std::string, std::string>> lines;
            detail::flatten(v, key, lines);
            for (const auto& [k, s] : lines) os << k << '=' << s << '\n';
        }
    }
}

inline void write_csv(std::ostream& os, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    for (std::size_t k = 0; k < header.size(); ++k) os << (k ? "," : "") << header[k];
    os << '\n';
    for (const auto& r : rows) {
        for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << fmt(r[k]);
        os << '\n';
    }
}

inline json csv_as_json(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        json row = json::object();
        for (std::size_t k = 0; k < header.size(); ++k) row[header[k]] = r[k];
        arr.push_back(std::move(row));
    }
    return arr;
}

/// Result of one command: a record, an optional CSV table and a status.
struct CommandResult {
    json record = json::object();
    std::vector<std::string> csv_header;
    std::vector<std::vector<double>> csv_rows;
    int status = exit_ok;
};

struct Context {
    json cfg;
    const json& numerics() const { return at(cfg, "numerics", "config"); }
    const json& tolerances() const { return at(numerics(), "tolerances", "numerics"); }
    double tol(const std::string& key) const { return get_number(tolerances(), key, "numerics.tolerances"); }
};

inline std::vector<Point> grid_points(const Context& ctx) {
    const json& g = at(ctx.numerics(), "grid", "numerics");
    std::vector<Point> pts;
    for (double x : get_range(g, "x", "numerics.grid")) {
        for (double y : get_range(g, "y", "numerics.grid")) pts.push_back({x, y});
    }
    return pts;
}

inline CommandResult cmd_structure_eval(const Context& ctx) {
    const StructureSpec spec = build_structure(ctx.cfg);
    const StructureField& s = spec.field;
    CommandResult r;
    r.csv_header = {"x", "y", "alpha", "beta", "delta", "g0", "g1", "re_lambda", "im_lambda"};
    for (Point p : grid_points(ctx)) {
        if (!s.contains(p)) throw Error(ErrorCode::out_of_domain, "grid point " + to_string(p) + " is outside the structure domain");
        const FiberCoefficients f = s.fiber(p);
        const Obstruction o = s.obstruction(p);
        const SpectralState l = s.spectral_lambda(p, false);
        r.csv_rows.push_back({p.x, p.y, f.alpha, f.beta, f.discriminant(), o.G0, o.G1, l.a(), l.b()});
    }
    r.record["command"] = "structure eval";
    r.record["structure"] = spec.description;
    r.record["rows"] = r.csv_rows.size();
    return r;
}

inline CommandResult cmd_rigidity_scan(const Context& ctx) {
    const StructureSpec spec = build_structure(ctx.cfg);
    const double tau = ctx.tol("rigid");
    double worst = 0.0;
    double scale = 1.0;
    Point at_pt{};
    std::size_t n = 0;
    for (Point p : grid_points(ctx)) {
        const FiberCoefficients f = spec.field.fiber(p);
        scale = std::max({scale, std::abs(f.alpha), std::abs(f.beta)});
        const double g = spec.field.rigidity_residual(p);
        if (g >= worst) worst = g, at_pt = p;
        ++n;
    }
    CommandResult r;
    r.record["command"] = "rigidity scan";
    r.record["structure"] = spec.description;
    r.record["samples"] = n;
    r.record["max_residual"] = worst;
    r.record["worst_point"] = point_json(at_pt);
    r.record["tolerance"] = tau * scale;
    r.record["rigid"] = worst <= tau * scale;
    return r;
}

inline CommandResult cmd_burgers_solve(const Context& ctx) {
    const json& b = at(ctx.cfg, "burgers", "config");
    const InitialProfile profile = build_profile(at(b, "profile", "burgers"));
    const std::vector<double> xs = get_range(b, "x", "burgers");
    const std::vector<double> ys = get_range(b, "y", "burgers");
    profile.validate(ys);
    NewtonOptions opt;
    opt.tolerance = ctx.tol("newton");
    opt.tau_cross = ctx.tol("cross");
    CommandResult r;
    r.csv_header = {"x", "y", "re_lambda", "im_lambda", "jacobian_modulus"};
    std::size_t solved = 0;
    for (const BurgersGridRow& row : burgers_grid(profile, xs, ys, opt)) {
        r.csv_rows.push_back({row.x, row.y, row.lambda.real(), row.lambda.imag(), row.jacobian_modulus});
        solved += row.solved;
    }
    const std::vector<double> window = get_numbers(b, "crossing_x", "burgers");
    if (window.size() != 2) throw ConfigError("burgers.crossing_x must be [x_min, x_max]");
    const int ns = get_int(b, "crossing_samples", "burgers");
    if (ns < 1) throw ConfigError("burgers.crossing_samples must be >= 1");
    std::vector<double> y_samples;
    for (int k = 0; k < ns; ++k) y_samples.push_back(ns == 1 ? ys.front() : ys.front() + (ys.back() - ys.front()) * k / (ns - 1));
    const auto cross = detect_crossing(profile, window[0], window[1], y_samples, opt.tau_cross);
    r.record["command"] = "burgers solve";
    r.record["profile"] = profile.name;
    r.record["rows"] = r.csv_rows.size();
    r.record["solved"] = solved;
    r.record["crossing"] = cross.has_value();
    if (cross) {
        r.record["crossing_x"] = cross->x;
        r.record["crossing_y0"] = cross->y0;
        r.record["crossing_jacobian_modulus"] = cross->jacobian_modulus;
    }
    return r;
}

inline CommandResult cmd_residue(const Context& ctx) {
    const StructureSpec spec = build_structure(ctx.cfg);
    const json& n = ctx.numerics();
    const Point zeta = get_point(n, "zeta", "numerics");
    const int samples = get_int(n, "n_samples", "numerics");
    const std::vector<double> radii = get_numbers(n, "radii", "numerics");
    if (radii.empty()) throw ConfigError("numerics.radii must not be empty");
    const Transport transport = get_transport(n);
    const AlgebraElement target = 2.0 * std::numbers::pi * j_element(spec.field.elliptic_sample(zeta, 0).fiber());
    const double tol_frozen = ctx.tol("residue");
    const double tol_rate = ctx.tol("rate");
    CommandResult r;
    json table = json::array();
    double prev_err = 0.0;
    double prev_r = 0.0;
    double worst_frozen = 0.0;
    double last_rate = 0.0;
    for (double rad : radii) {
        const double ef = magnitude(frozen_residue(spec.field, zeta, rad, samples) - target);
        const double ev = magnitude(variable_residue(spec.field, zeta, rad, samples, transport) - target);
        json row = {{"r", rad}, {"frozen_error", ef}, {"variable_error", ev}};
        if (!table.empty()) {
            last_rate = std::log(prev_err / ev) / std::log(prev_r / rad);
            row["rate"] = last_rate;
        } else {
            row["rate"] = nullptr;
        }
        table.push_back(row);
        worst_frozen = std::max(worst_frozen, ef);
        prev_err = ev;
        prev_r = rad;
    }
    r.record["command"] = "residue";
    r.record["zeta"] = point_json(zeta);
    r.record["n_samples"] = samples;
    r.record["transport"] = to_string(transport);
    r.record["target"] = element_json(target);
    r.record["table"] = table;
    r.record["frozen_max_error"] = worst_frozen;
    r.record["rate"] = last_rate;
    // a variable residue already at rounding level has no meaningful rate
    const bool exact = prev_err <= tol_frozen;
    const bool ok = worst_frozen <= tol_frozen && (radii.size() < 2 || exact || last_rate >= tol_rate);
    r.record["pass"] = ok;
    r.status = ok ? exit_ok : exit_tolerance;
    return r;
}

inline CommandResult cmd_cp_reconstruct(const Context& ctx) {
    const StructureSpec spec = build_structure(ctx.cfg);
    const json& n = ctx.numerics();
    const std::string name = get_string(at(ctx.cfg, "cp", "config"), "section", "cp");
    const Section f = build_section(ctx.cfg, name);
    const Region region = build_region(ctx.cfg);
    CPOptions opt;
    opt.mesh = build_mesh(n);
    opt.transport = get_transport(n);
    opt.tau_rigid = ctx.tol("rigid");
    const Point zeta = get_point(n, "zeta", "numerics");
    const CPReport rep = reconstruct(f, region, spec.field, zeta, opt);
    const double tol = ctx.tol("cp");
    CommandResult r;
    r.record["command"] = "cp reconstruct";
    r.record["structure"] = spec.description;
    r.record["section"] = name;
    r.record["zeta"] = point_json(zeta);
    r.record["transport"] = to_string(rep.transport);
    r.record["boundary"] = element_json(rep.boundary);
    r.record["area"] = element_json(rep.area);
    r.record["value"] = element_json(rep.value);
    r.record["exact"] = element_json(rep.exact);
    r.record["residual"] = rep.residual;
    r.record["alternate_residual"] = rep.alternate_residual;
    r.record["rigidity_max"] = rep.rigidity.max_residual;
    r.record["mesh"] = {{"cells", rep.mesh.cells},
                        {"cell_order", rep.mesh.cell_order},
                        {"patch_radial", rep.mesh.patch_radial},
                        {"patch_angular", rep.mesh.patch_angular},
                        {"boundary_panels", rep.mesh.boundary_panels},
                        {"boundary_order", rep.mesh.boundary_order},
                        {"patch_fraction", rep.mesh.patch_fraction}};
    r.record["tolerance"] = tol;
    r.record["pass"] = rep.residual <= tol;
    r.status = rep.residual <= tol ? exit_ok : exit_tolerance;
    return r;
}

inline CommandResult cmd_weight_solve(const Context& ctx) {
    const StructureSpec spec = build_structure(ctx.cfg);
    const json& n = ctx.numerics();
    const Point base = get_point(n, "basepoint", "numerics");
    const Point p = get_point(n, "point", "numerics");
    WeightOptions opt;
    opt.tau_compat = ctx.tol("compat");
    const WeightSolution w = solve_weight(spec.field, base, p, opt);
    CommandResult r;
    r.record["command"] = "weight solve";
    r.record["structure"] = spec.description;
    r.record["basepoint"] = point_json(base);
    r.record["point"] = point_json(p);
    r.record["psi"] = w.psi;
    r.record["phi"] = w.phi;
    r.record["compat_residual"] = w.compat_residual;
    if (spec.epsilon) {
        const double ref = spec.epsilon->weight(p) / spec.epsilon->weight(base);
        const double dev = std::abs(w.psi - ref) / std::abs(ref);
        const double tol = ctx.tol("weight");
        r.record["closed_form"] = ref;
        r.record["relative_deviation"] = dev;
        r.record["tolerance"] = tol;
        r.record["pass"] = dev <= tol;
        if (dev > tol) r.status = exit_tolerance;
    }
    return r;
}

inline CommandResult cmd_second_order(const Context& ctx) {
    const StructureSpec spec = build_structure(ctx.cfg);
    const json& n = ctx.numerics();
    const std::string name = get_string(at(ctx.cfg, "second_order", "config"), "section", "second_order");
    const Section f = build_section(ctx.cfg, name);
    const Point p = get_point(n, "point", "numerics");
    const std::vector<double> hs = get_numbers(n, "h_list", "numerics");
    const SecondOrderReport rep = verify_expansion(f, p, spec.field, hs, ctx.tol("rigid"));
    CommandResult r;
    r.record["command"] = "second-order verify";
    r.record["structure"] = spec.description;
    r.record["section"] = name;
    r.record["point"] = point_json(p);
    r.record["rhs"] = element_json(rep.rhs);
    json table = json::array();
    for (const SecondOrderRow& row : rep.rows) {
        table.push_back({{"h", row.h},
                         {"residual_scalar", row.residual_scalar},
                         {"residual_i", row.residual_i},
                         {"residual", row.residual},
                         {"order", row.order}});
    }
    r.record["table"] = table;
    r.record["order"] = rep.order;
    r.record["finest_residual"] = rep.finest_residual();
    const double tol = ctx.tol("second_order");
    const double band = ctx.tol("order_band");
    // residuals at rounding level carry no order information
    const bool order_ok = rep.rows.size() < 2 || rep.finest_residual() <= 1e-3 * tol || std::abs(rep.order - 2.0) <= band;
    const bool ok = rep.finest_residual() <= tol && order_ok;
    r.record["pass"] = ok;
    r.status = ok ? exit_ok : exit_tolerance;
    return r;
}

inline CommandResult cmd_jets_check(const Context& ctx) {
    const json& s = at(ctx.cfg, "structure", "config");
    const std::string kind = get_string(s, "kind", "structure");
    StructureFamily family;
    if (kind == "epsilon") {
        family = epsilon_family();
    } else if (kind == "constant") {
        family = constant_family(get_number(s, "alpha", "structure"), get_number(s, "beta", "structure"));
    } else {
        throw ConfigError("jets check needs a one-parameter family: structure.kind 'epsilon' or 'constant'");
    }
    const double step = get_number(ctx.numerics(), "eps_step", "numerics");
    const JetExtractor jets(family, step);
    const ComplexField mu = jets.mu();
    const ComplexField nu = jets.nu();
    const ComplexField rho = jets.rho();
    const std::vector<double> tols = get_numbers(ctx.tolerances(), "jets", "numerics.tolerances");
    if (tols.size() != 3) throw ConfigError("numerics.tolerances.jets must list three bounds");
    CommandResult r;
    json table = json::array();
    double worst[3] = {0, 0, 0};
    for (Point p : grid_points(ctx)) {
        const double r1 = std::abs(check_first_jet(mu, p));
        const double r2 = std::abs(check_second_jet(mu, nu, p));
        const double r3 = std::abs(check_third_jet(mu, nu, rho, p));
        const JetSample js = jets.extract(p);
        table.push_back({{"x", p.x},
                         {"y", p.y},
                         {"mu", complex_json(js.mu)},
                         {"first", r1},
                         {"second", r2},
                         {"third", r3}});
        worst[0] = std::max(worst[0], r1);
        worst[1] = std::max(worst[1], r2);
        worst[2] = std::max(worst[2], r3);
    }
    r.record["command"] = "jets check";
    r.record["family"] = kind;
    r.record["eps_step"] = step;
    r.record["table"] = table;
    bool ok = true;
    const char* names[3] = {"first", "second", "third"};
    for (int k = 0; k < 3; ++k) {
        r.record[std::string("max_") + names[k]] = worst[k];
        ok = ok && worst[k] <= tols[k];
    }
    r.record["pass"] = ok;
    r.status = ok ? exit_ok : exit_tolerance;
    return r;
}

inline CommandResult cmd_selftest(const Context& ctx) {
    CommandResult r;
    const std::vector<SelfCheck> checks = run_selftest(ctx.cfg);
    json table = json::array();
    bool ok = true;
    for (const SelfCheck& c : checks) {
        table.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"status", c.passed ? "pass" : "fail"}});
        ok = ok && c.passed;
    }
    r.record["command"] = "selftest";
    r.record["check"] = table;
    r.record["checks"] = checks.size();
    r.record["pass"] = ok;
    r.status = ok ? exit_ok : exit_tolerance;
    return r;
}

/// Runs one invocation. args excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    std::vector<std::pair<std::string, std::string>> overrides;
    try {
        overrides = extract_overrides(args);
    } catch (const ConfigError& e) {
        err << "error: config: " << e.what() << '\n';
        return exit_config;
    }

    CLI::App app{"Numerics for variable elliptic structures"};
    app.name("velliptic");
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    std::string output_path;
    bool as_json = false;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--output", output_path, "write the table (or record) to this file");
    app.add_flag("--json", as_json, "emit a single JSON record");

    using Handler = CommandResult (*)(const Context&);
    Handler handler = nullptr;
    const auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help, Handler h) {
        parent->add_subcommand(name, help)->callback([&handler, h] { handler = h; });
    };
    const auto group = [&](const std::string& name, const std::string& help) {
        CLI::App* g = app.add_subcommand(name, help);
        g->require_subcommand(1);
        return g;
    };
    leaf(group("structure", "structure fields"), "eval", "grid dump of alpha, beta, delta, G0, G1, lambda",
         cmd_structure_eval);
    leaf(group("rigidity", "rigidity diagnostics"), "scan", "max |G| over the grid", cmd_rigidity_scan);
    leaf(group("burgers", "Burgers transport"), "solve", "implicit solution grid and crossing report",
         cmd_burgers_solve);
    leaf(&app, "residue", "frozen and variable residue convergence table", cmd_residue);
    leaf(group("cp", "Cauchy-Pompeiu representation"), "reconstruct", "reconstruct f(zeta)", cmd_cp_reconstruct);
    leaf(group("weight", "covariant weights"), "solve", "integrate the weight equation", cmd_weight_solve);
    leaf(group("second-order", "second-order expansion"), "verify", "convergence table", cmd_second_order);
    leaf(group("jets", "epsilon jets"), "check", "jet equation residuals over the grid", cmd_jets_check);
    leaf(&app, "selftest", "property suite on the configured structure", cmd_selftest);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: arguments: " << e.what() << '\n';
        return exit_config;
    }

    Context ctx;
    try {
        ctx.cfg = default_config();
        if (!config_path.empty()) ctx.cfg.merge_patch(load_config_file(config_path));
        for (const auto& [k, v] : overrides) apply_override(ctx.cfg, k, v);
    } catch (const ConfigError& e) {
        err << "error: config: " << e.what() << '\n';
        return exit_config;
    }

    CommandResult res;
    try {
        res = handler(ctx);
    } catch (const ConfigError& e) {
        err << "error: config: " << e.what() << '\n';
        return exit_config;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_status(e.code());
    } catch (const json::exception& e) {
        err << "error: config: " << e.what() << '\n';
        return exit_config;
    }

    std::ofstream file;
    if (!output_path.empty()) {
        file.open(output_path);
        if (!file) {
            err << "error: config: cannot write '" << output_path << "'\n";
            return exit_config;
        }
    }
    std::ostream& primary = output_path.empty() ? out : static_cast<std::ostream&>(file);
    const bool has_table = !res.csv_header.empty();
    if (as_json) {
        if (has_table) res.record["table"] = csv_as_json(res.csv_header, res.csv_rows);
        primary << res.record.dump() << '\n';
    } else if (has_table) {
        write_csv(primary, res.csv_header, res.csv_rows);
        write_text(output_path.empty() ? err : out, res.record);
    } else {
        write_text(primary, res.record);
    }
    return res.status;
}

}  // namespace velliptic::cli
