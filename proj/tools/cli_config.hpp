#pragma once

// Run configuration for the velliptic command-line tool: a JSON document with
// sections "structure", "sections", "region", "numerics" and per-command
// blocks, merged over built-in defaults and then over --dotted.key overrides.

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "velliptic/velliptic.hpp"

namespace velliptic::cli {

using json = nlohmann::ordered_json;

/// Configuration problem: bad JSON, missing key, wrong type, bad expression.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline json default_config() {
    return json::parse(R"({
  "structure": {"kind": "epsilon", "epsilon": 0.1, "C": 1.0},
  "sections": {
    "f": {"u": "1", "v": "0"},
    "g": {"u": "x*y", "v": "x+y"}
  },
  "region": {"kind": "disk", "center": [0.0, 0.0], "radius": 0.5},
  "numerics": {
    "h": 1e-5,
    "tau_par": 1e-10,
    "grid": {"x": [-0.5, 0.5, 5], "y": [-0.5, 0.5, 5]},
    "point": [0.1, 0.2],
    "zeta": [0.0, 0.0],
    "basepoint": [0.0, 0.0],
    "radii": [0.4, 0.2, 0.1, 0.05],
    "n_samples": 256,
    "h_list": [1e-2, 5e-3, 2.5e-3],
    "eps_step": 1e-2,
    "transport": "embedded",
    "mesh": {"cells": 6, "cell_order": 4, "patch_radial": 12, "patch_angular": 24,
             "boundary_panels": 8, "boundary_order": 8, "patch_fraction": 0.5},
    "tolerances": {"rigid": 1e-6, "cp": 1e-3, "compat": 1e-6, "weight": 1e-7,
                   "residue": 1e-10, "rate": 0.9, "second_order": 1e-6, "order_band": 0.3,
                   "jets": [1e-8, 1e-6, 1e-5], "newton": 1e-12, "cross": 1e-6}
  },
  "cp": {"section": "f"},
  "second_order": {"section": "g"},
  "burgers": {
    "profile": {"kind": "epsilon", "epsilon": 0.1},
    "x": [0.0, 1.0, 5],
    "y": [-1.0, 1.0, 5],
    "crossing_x": [0.0, 10.0],
    "crossing_samples": 41
  }
})");
}

inline json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
}

/// Sets a dotted path such as numerics.mesh.cells. The value is read as JSON
/// when it parses, otherwise taken as a string.
inline void apply_override(json& cfg, const std::string& dotted, const std::string& raw) {
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* node = &cfg;
    std::size_t start = 0;
    for (;;) {
        const std::size_t dot = dotted.find('.', start);
        const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError("malformed override key '" + dotted + "'");
        if (!node->is_object()) throw ConfigError("override '" + dotted + "' descends into a non-object");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

/// Pulls --a.b value and --a.b=value pairs (keys containing a dot) out of argv.
inline std::vector<std::pair<std::string, std::string>> extract_overrides(std::vector<std::string>& args) {
    std::vector<std::pair<std::string, std::string>> out;
    std::vector<std::string> kept;
    for (std::size_t k = 0; k < args.size(); ++k) {
        const std::string& a = args[k];
        if (a.rfind("--", 0) == 0 && a.find('.') != std::string::npos && a.size() > 2 &&
            !std::isdigit(static_cast<unsigned char>(a[2]))) {
            const std::size_t eq = a.find('=');
            if (eq != std::string::npos) {
                out.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
            } else {
                if (k + 1 >= args.size()) throw ConfigError("override '" + a + "' is missing a value");
                out.emplace_back(a.substr(2), args[k + 1]);
                ++k;
            }
        } else {
            kept.push_back(a);
        }
    }
    args = std::move(kept);
    return out;
}

inline const json& at(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError("missing key '" + where + "." + key + "'");
    return j.at(key);
}

inline double get_number(const json& j, const std::string& key, const std::string& where) {
    const json& v = at(j, key, where);
    if (!v.is_number()) throw ConfigError("'" + where + "." + key + "' must be a number");
    return v.get<double>();
}

inline int get_int(const json& j, const std::string& key, const std::string& where) {
    const json& v = at(j, key, where);
    if (!v.is_number_integer() && !(v.is_number() && std::floor(v.get<double>()) == v.get<double>())) {
        throw ConfigError("'" + where + "." + key + "' must be an integer");
    }
    return static_cast<int>(v.get<double>());
}

inline std::string get_string(const json& j, const std::string& key, const std::string& where) {
    const json& v = at(j, key, where);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.dump();
    throw ConfigError("'" + where + "." + key + "' must be a string");
}

inline Point get_point(const json& j, const std::string& key, const std::string& where) {
    const json& v = at(j, key, where);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ConfigError("'" + where + "." + key + "' must be a pair [x, y]");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

inline std::vector<double> get_numbers(const json& j, const std::string& key, const std::string& where) {
    const json& v = at(j, key, where);
    if (!v.is_array()) throw ConfigError("'" + where + "." + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
        if (!e.is_number()) throw ConfigError("'" + where + "." + key + "' must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

/// [lo, hi, n] -> n equispaced values (n = 1 gives lo).
inline std::vector<double> get_range(const json& j, const std::string& key, const std::string& where) {
    const std::vector<double> r = get_numbers(j, key, where);
    if (r.size() != 3 || r[2] < 1 || std::floor(r[2]) != r[2]) {
        throw ConfigError("'" + where + "." + key + "' must be [lo, hi, n] with integer n >= 1");
    }
    const int n = static_cast<int>(r[2]);
    std::vector<double> out;
    for (int k = 0; k < n; ++k) out.push_back(n == 1 ? r[0] : r[0] + (r[1] - r[0]) * k / (n - 1));
    return out;
}

inline Expression::Params get_params(const json& j) {
    Expression::Params p;
    if (j.is_object() && j.contains("params")) {
        for (const auto& [k, v] : j.at("params").items()) {
            if (!v.is_number()) throw ConfigError("parameter '" + k + "' must be a number");
            p[k] = v.get<double>();
        }
    }
    return p;
}

inline Expression parse_expr(const std::string& text, const Expression::Params& params, const std::string& where) {
    try {
        return Expression::parse(text, params);
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

/// Structure as configured, plus the epsilon fixture when kind = epsilon.
struct StructureSpec {
    StructureField field;
    std::optional<EpsilonStructure> epsilon;
    std::string description;
};

/// A field given by an expression; optional "<name>_x"/"<name>_y" keys
/// override its first partials (second partials then come from
/// differentiating those).
inline ScalarField expression_field(const json& s, const std::string& name, const Expression::Params& params) {
    const Expression e = parse_expr(get_string(s, name, "structure"), params, "structure." + name);
    const bool has_x = s.contains(name + "_x");
    const bool has_y = s.contains(name + "_y");
    if (!has_x && !has_y) return field_from_expression(e);
    if (!(has_x && has_y)) throw ConfigError("structure: give both " + name + "_x and " + name + "_y or neither");
    const Expression ex = parse_expr(get_string(s, name + "_x", "structure"), params, "structure." + name + "_x");
    const Expression ey = parse_expr(get_string(s, name + "_y", "structure"), params, "structure." + name + "_y");
    const Expression exx = ex.derivative('x');
    const Expression exy = ex.derivative('y');
    const Expression eyy = ey.derivative('y');
    return ScalarField::from_jet([e, ex, ey, exx, exy, eyy](Point p, int order) {
        Jet2 j{e(p), 0, 0, 0, 0, 0};
        if (order >= 1) j.x = ex(p), j.y = ey(p);
        if (order >= 2) j.xx = exx(p), j.xy = exy(p), j.yy = eyy(p);
        return j;
    });
}

inline StructureSpec build_structure(const json& cfg) {
    const json& s = at(cfg, "structure", "config");
    const std::string kind = get_string(s, "kind", "structure");
    const double tau_par = cfg.contains("numerics") && cfg["numerics"].contains("tau_par")
                               ? get_number(cfg["numerics"], "tau_par", "numerics")
                               : 1e-10;
    if (kind == "epsilon") {
        const double eps = get_number(s, "epsilon", "structure");
        const double C = s.contains("C") ? get_number(s, "C", "structure") : 1.0;
        EpsilonStructure e(eps, C);
        std::ostringstream d;
        d << "epsilon(" << eps << ")";
        return {e.structure(tau_par), e, d.str()};
    }
    if (kind == "constant") {
        const double a = get_number(s, "alpha", "structure");
        const double b = get_number(s, "beta", "structure");
        return {StructureField(CoefficientEvaluator::constant(a, b), tau_par), std::nullopt, "constant"};
    }
    if (kind == "expressions") {
        const Expression::Params params = get_params(s);
        const double scale = s.contains("scale") ? get_number(s, "scale", "structure") : 1.0;
        const std::string deriv = s.contains("derivatives") ? get_string(s, "derivatives", "structure") : "symbolic";
        if (!(scale > 0.0)) throw ConfigError("structure.scale must be positive");
        if (deriv == "finite-difference") {
            const Expression a = parse_expr(get_string(s, "alpha", "structure"), params, "structure.alpha");
            const Expression b = parse_expr(get_string(s, "beta", "structure"), params, "structure.beta");
            return {StructureField(CoefficientEvaluator::sampled([a](Point p) { return a(p); },
                                                                 [b](Point p) { return b(p); }, {}, scale),
                                   tau_par),
                    std::nullopt, "expressions"};
        }
        if (deriv != "symbolic") throw ConfigError("structure.derivatives must be 'symbolic' or 'finite-difference'");
        ScalarField a = expression_field(s, "alpha", params);
        ScalarField b = expression_field(s, "beta", params);
        return {StructureField(CoefficientEvaluator(std::move(a), std::move(b), {}, scale), tau_par), std::nullopt,
                "expressions"};
    }
    throw ConfigError("structure.kind must be 'epsilon', 'constant' or 'expressions', got '" + kind + "'");
}

/// Section by name from the "sections" block. Entries are {"u": .., "v": ..}
/// or {"kind": "kernel", "zeta": [xi, eta]}.
inline Section build_section(const json& cfg, const std::string& name) {
    const json& all = at(cfg, "sections", "config");
    const json& s = at(all, name, "sections");
    const std::string where = "sections." + name;
    if (s.contains("kind") && get_string(s, "kind", where) == "kernel") {
        return Section::kernel(get_point(s, "zeta", where));
    }
    const Expression::Params params = get_params(s);
    return Section::from_expressions(parse_expr(get_string(s, "u", where), params, where + ".u"),
                                     parse_expr(get_string(s, "v", where), params, where + ".v"));
}

inline Region build_region(const json& cfg) {
    const json& r = at(cfg, "region", "config");
    const std::string kind = get_string(r, "kind", "region");
    try {
        if (kind == "disk") return Region::disk(get_point(r, "center", "region"), get_number(r, "radius", "region"));
        if (kind == "rectangle") {
            const json& c = at(r, "corners", "region");
            if (!c.is_array() || c.size() != 2) throw ConfigError("region.corners must be [[x0, y0], [x1, y1]]");
            json wrap = {{"a", c[0]}, {"b", c[1]}};
            return Region::rectangle(get_point(wrap, "a", "region.corners"), get_point(wrap, "b", "region.corners"));
        }
    } catch (const Error& e) {
        throw ConfigError(std::string("region: ") + e.what());
    }
    throw ConfigError("region.kind must be 'disk' or 'rectangle', got '" + kind + "'");
}

inline CPMesh build_mesh(const json& numerics) {
    CPMesh m;
    if (!numerics.contains("mesh")) return m;
    const json& j = numerics.at("mesh");
    const auto opt_int = [&](const char* key, int& dst) {
        if (j.contains(key)) {
            dst = get_int(j, key, "numerics.mesh");
            if (dst < 1) throw ConfigError(std::string("numerics.mesh.") + key + " must be >= 1");
        }
    };
    opt_int("cells", m.cells);
    opt_int("cell_order", m.cell_order);
    opt_int("patch_radial", m.patch_radial);
    opt_int("patch_angular", m.patch_angular);
    opt_int("boundary_panels", m.boundary_panels);
    opt_int("boundary_order", m.boundary_order);
    if (j.contains("patch_fraction")) {
        m.patch_fraction = get_number(j, "patch_fraction", "numerics.mesh");
        if (!(m.patch_fraction > 0.0 && m.patch_fraction <= 1.0)) {
            throw ConfigError("numerics.mesh.patch_fraction must be in (0, 1]");
        }
    }
    return m;
}

inline Transport get_transport(const json& numerics) {
    const std::string t = numerics.contains("transport") ? get_string(numerics, "transport", "numerics") : "embedded";
    if (t == "embedded") return Transport::embedded;
    if (t == "coefficientwise") return Transport::coefficientwise;
    throw ConfigError("numerics.transport must be 'embedded' or 'coefficientwise'");
}

inline InitialProfile build_profile(const json& p) {
    const std::string kind = get_string(p, "kind", "burgers.profile");
    const auto get_c = [&](const char* key) {
        const json& v = at(p, key, "burgers.profile");
        if (v.is_number()) return cplx{v.get<double>(), 0.0};
        if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
            return cplx{v[0].get<double>(), v[1].get<double>()};
        }
        throw ConfigError(std::string("burgers.profile.") + key + " must be a number or [re, im]");
    };
    if (kind == "constant") return InitialProfile::constant(get_c("value"));
    if (kind == "affine") return InitialProfile::affine(get_c("c0"), get_c("slope"));
    if (kind == "epsilon") return InitialProfile::epsilon(get_number(p, "epsilon", "burgers.profile"));
    throw ConfigError("burgers.profile.kind must be 'constant', 'affine' or 'epsilon'");
}

}  // namespace velliptic::cli
