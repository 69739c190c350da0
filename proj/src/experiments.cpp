#include "stressbasis/experiments.hpp"

#include "stressbasis/metrics.hpp"
#include "stressbasis/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>

namespace sb {

namespace {

// ---------------------------------------------------------------------------------------------
// presets

const char* const kPresetText[][2] = {
    {"example1", R"({
  "name": "example1",
  "description": "Pressurized annulus (p = 1 on the hole) with axisymmetric modes; Lame reference.",
  "domain": {"type": "annulus", "ra": 0.1, "rb": 0.3},
  "mesh": {"nr": 128},
  "basis": {"backend": "eigen", "n_modes": 120, "wavenumbers": [0]},
  "material": {"type": "isotropic", "Y": 1.0, "nu": 0.33},
  "particular": {"recipe": "axisym_airy", "p_in": 1.0, "p_out": 0.0},
  "principles": ["PT", "SE"],
  "N": 120,
  "oracle": {"type": "lame"},
  "slope_window": [20, 120],
  "checks": [
    {"type": "energy_rel", "principle": "PT", "N": 10, "tol": 1e-4},
    {"type": "monotone", "principle": "PT", "column": "energy"},
    {"type": "monotone", "principle": "PT", "column": "E_N"},
    {"type": "slope", "principle": "PT", "expected": -1.5, "tol": 0.3},
    {"type": "equilibrium", "principle": "PT"}
  ],
  "full": {"basis": {"n_modes": 500}, "N": 500, "slope_window": [100, 500]}
})"},
    {"example2_dp", R"({
  "name": "example2_dp",
  "description": "Unit square under a discontinuous band pressure on top and bottom; PT principle, FEM reference.",
  "domain": {"type": "rectangle", "Lx": 1.0, "Ly": 1.0},
  "mesh": {"nx": 48, "ny": 48, "features": [["x", 0.25], ["x", 0.75], ["y", 0.5]]},
  "basis": {"backend": "eigen", "n_modes": 120},
  "material": {"type": "isotropic", "Y": 1.0, "nu": 0.33},
  "particular": {"recipe": "band", "p": 1.0, "profile": "discontinuous"},
  "principles": ["PT"],
  "N": 120,
  "oracle": {"type": "fem", "refine": 2},
  "slope_window": [10, 60],
  "checks": [
    {"type": "slope", "principle": "PT", "expected": -0.22, "tol": 0.15},
    {"type": "monotone", "principle": "PT", "column": "objective"},
    {"type": "equilibrium", "principle": "PT"}
  ],
  "full": {"basis": {"n_modes": 500}, "N": 500, "slope_window": [40, 500]}
})"},
    {"example2_cp", R"({
  "name": "example2_cp",
  "description": "Unit square under a smooth quartic band pressure on top and bottom; PT principle, FEM reference.",
  "domain": {"type": "rectangle", "Lx": 1.0, "Ly": 1.0},
  "mesh": {"nx": 48, "ny": 48, "features": [["x", 0.25], ["x", 0.75], ["y", 0.5]]},
  "basis": {"backend": "eigen", "n_modes": 120},
  "material": {"type": "isotropic", "Y": 1.0, "nu": 0.33},
  "particular": {"recipe": "band", "p": 1.0, "profile": "quartic"},
  "principles": ["PT"],
  "N": 120,
  "oracle": {"type": "fem", "refine": 2},
  "slope_window": [10, 60],
  "checks": [
    {"type": "slope", "principle": "PT", "expected": -0.72, "tol": 0.2},
    {"type": "energy_rel", "principle": "PT", "N": 20, "tol": 0.01},
    {"type": "monotone", "principle": "PT", "column": "objective"},
    {"type": "equilibrium", "principle": "PT"}
  ],
  "full": {"basis": {"n_modes": 500}, "N": 500, "slope_window": [40, 500]}
})"},
    {"example4", R"({
  "name": "example4",
  "description": "Two-density block under gravity (rho = 3 below y = 1/2, 1 above); PT principle with body force.",
  "domain": {"type": "rectangle", "Lx": 1.0, "Ly": 1.0},
  "mesh": {"nx": 48, "ny": 48, "features": [["x", 0.25], ["x", 0.75], ["y", 0.5]]},
  "basis": {"backend": "eigen", "n_modes": 120},
  "material": {"type": "isotropic", "Y": 1.0, "nu": 0.33},
  "particular": {"recipe": "gravity", "rho1": 1.0, "rho2": 3.0, "g": 1.0},
  "principles": ["PT_body"],
  "N": 120,
  "oracle": {"type": "fem", "refine": 2},
  "slope_window": [10, 60],
  "checks": [
    {"type": "error_at", "principle": "PT_body", "N": 0, "expected": 0.04, "tol": 0.01},
    {"type": "slope", "principle": "PT_body", "expected": -0.58, "tol": 0.25},
    {"type": "monotone", "principle": "PT_body", "column": "objective"},
    {"type": "equilibrium", "principle": "PT_body"}
  ],
  "full": {"basis": {"n_modes": 500}, "N": 500, "slope_window": [40, 500]}
})"},
    {"example5", R"({
  "name": "example5",
  "description": "Annulus whose hole carries a net force (sigma_rr = cos theta); m = 1 cos modes, PT versus SE.",
  "domain": {"type": "annulus", "ra": 0.1, "rb": 0.3},
  "mesh": {"nr": 128},
  "basis": {"backend": "eigen", "n_modes": 200, "wavenumbers": [1], "sin_family": false},
  "material": {"type": "isotropic", "Y": 1.0, "nu": 0.33},
  "particular": {"recipe": "annulus_m1"},
  "principles": ["PT", "SE"],
  "N": 200,
  "oracle": {"type": "annulus_m1"},
  "slope_window": [40, 200],
  "checks": [
    {"type": "plateau", "principle": "PT", "from": 40, "to": 200, "min_ratio": 0.8},
    {"type": "error_ratio", "principle": "SE", "other": "PT", "N": 200, "max_ratio": 0.1},
    {"type": "cesaro", "principle": "PT", "component": 2, "expected": "hole_resultant", "rel_tol": 0.05},
    {"type": "cesaro", "principle": "SE", "component": 1, "expected": 0.0, "abs_tol": 1e-3},
    {"type": "cesaro", "principle": "SE", "component": 2, "expected": 0.0, "abs_tol": 1e-3},
    {"type": "monotone", "principle": "SE", "column": "energy"},
    {"type": "galerkin", "principle": "SE"}
  ]
})"},
    {"example7_dc", R"({
  "name": "example7_dc",
  "description": "Bi-material square (Y = 3 below y = 1/2, 1 above) under uniform vertical pressure; SE principle.",
  "domain": {"type": "rectangle", "Lx": 1.0, "Ly": 1.0},
  "mesh": {"nx": 48, "ny": 48, "features": [["x", 0.25], ["x", 0.75], ["y", 0.5]]},
  "basis": {"backend": "eigen", "n_modes": 120},
  "material": {"type": "profile", "profile": "discontinuous", "Y_low": 3.0, "Y_high": 1.0, "nu": 0.33, "y0": 0.5},
  "particular": {"recipe": "uniform", "sxx": 0.0, "syy": -1.0, "sxy": 0.0},
  "principles": ["SE"],
  "N": 120,
  "oracle": {"type": "fem", "refine": 2},
  "slope_window": [10, 60],
  "checks": [
    {"type": "slope", "principle": "SE", "expected": -0.22, "tol": 0.2},
    {"type": "monotone", "principle": "SE", "column": "energy"},
    {"type": "galerkin", "principle": "SE"},
    {"type": "equilibrium", "principle": "SE"}
  ],
  "full": {"basis": {"n_modes": 500}, "N": 500, "slope_window": [40, 500]}
})"},
    {"example7_ramp", R"({
  "name": "example7_ramp",
  "description": "As example7_dc with a linear modulus ramp over 0.45 <= y <= 0.55; SE principle.",
  "domain": {"type": "rectangle", "Lx": 1.0, "Ly": 1.0},
  "mesh": {"nx": 48, "ny": 48, "features": [["x", 0.25], ["x", 0.75], ["y", 0.5]]},
  "basis": {"backend": "eigen", "n_modes": 120},
  "material": {"type": "profile", "profile": "ramp", "Y_low": 3.0, "Y_high": 1.0, "nu": 0.33, "y0": 0.5, "zeta": 0.05},
  "particular": {"recipe": "uniform", "sxx": 0.0, "syy": -1.0, "sxy": 0.0},
  "principles": ["SE"],
  "N": 120,
  "oracle": {"type": "fem", "refine": 2},
  "slope_window": [10, 60],
  "checks": [
    {"type": "slope", "principle": "SE", "expected": -0.42, "tol": 0.2},
    {"type": "energy_rel", "principle": "SE", "N": 40, "tol": 1e-3},
    {"type": "monotone", "principle": "SE", "column": "energy"},
    {"type": "galerkin", "principle": "SE"},
    {"type": "equilibrium", "principle": "SE"}
  ],
  "full": {"basis": {"n_modes": 500}, "N": 500, "slope_window": [40, 500]}
})"},
    {"example8_square_ortho", R"({
  "name": "example8_square_ortho",
  "description": "Orthotropic square (Yx = 1, Yy = 2); sigma_p is the isotropic PT solution of the quartic band load; SE principle.",
  "domain": {"type": "rectangle", "Lx": 1.0, "Ly": 1.0},
  "mesh": {"nx": 48, "ny": 48, "features": [["x", 0.25], ["x", 0.75], ["y", 0.5]]},
  "basis": {"backend": "eigen", "n_modes": 120},
  "material": {"type": "orthotropic", "Yx": 1.0, "Yy": 2.0, "nuxy": 0.33, "Gxy": 1.0},
  "particular": {"recipe": "oracle", "principle": "PT", "N": 120,
                 "material": {"type": "isotropic", "Y": 1.0, "nu": 0.33},
                 "particular": {"recipe": "band", "p": 1.0, "profile": "quartic"}},
  "principles": ["SE"],
  "N": 120,
  "oracle": {"type": "fem", "refine": 2},
  "slope_window": [10, 60],
  "checks": [
    {"type": "span_agreement", "principle": "SE", "n": 121, "tol": 0.01},
    {"type": "monotone", "principle": "SE", "column": "energy"},
    {"type": "monotone", "principle": "SE", "column": "objective"},
    {"type": "galerkin", "principle": "SE"},
    {"type": "equilibrium", "principle": "SE"},
    {"type": "basis"}
  ]
})"},
};

// ---------------------------------------------------------------------------------------------
// validation

[[noreturn]] void fail(const std::string& ctx, const std::string& msg)
{
    throw ConfigError(ctx + ": " + msg);
}

void allow_keys(const Json& o, std::initializer_list<const char*> keys, const std::string& ctx)
{
    if (!o.is_object()) fail(ctx, "expected an object");
    for (auto it = o.begin(); it != o.end(); ++it) {
        bool ok = false;
        for (const char* k : keys) ok = ok || it.key() == k;
        if (!ok) fail(ctx, "unknown key '" + it.key() + "'");
    }
}

double get_num(const Json& o, const char* key, const std::string& ctx, std::optional<double> def = std::nullopt)
{
    if (!o.contains(key)) {
        if (def) return *def;
        fail(ctx, std::string("missing '") + key + "'");
    }
    const Json& v = o.at(key);
    if (!v.is_number()) fail(ctx, std::string("'") + key + "' must be a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) fail(ctx, std::string("'") + key + "' must be finite");
    return d;
}

int get_int(const Json& o, const char* key, const std::string& ctx, std::optional<int> def = std::nullopt)
{
    if (!o.contains(key)) {
        if (def) return *def;
        fail(ctx, std::string("missing '") + key + "'");
    }
    const Json& v = o.at(key);
    if (!v.is_number_integer()) fail(ctx, std::string("'") + key + "' must be an integer");
    return v.get<int>();
}

std::string get_str(const Json& o, const char* key, const std::string& ctx,
                    std::optional<std::string> def = std::nullopt)
{
    if (!o.contains(key)) {
        if (def) return *def;
        fail(ctx, std::string("missing '") + key + "'");
    }
    const Json& v = o.at(key);
    if (!v.is_string()) fail(ctx, std::string("'") + key + "' must be a string");
    return v.get<std::string>();
}

void one_of(const std::string& v, std::initializer_list<const char*> options, const std::string& ctx)
{
    for (const char* o : options)
        if (v == o) return;
    std::string list;
    for (const char* o : options) list += std::string(list.empty() ? "" : ", ") + o;
    fail(ctx, "'" + v + "' is not one of " + list);
}

Json validate_material(const Json& m, const std::string& ctx)
{
    std::string type = get_str(m, "type", ctx);
    one_of(type, {"isotropic", "profile", "orthotropic"}, ctx + ".type");
    Json out = {{"type", type}};
    if (type == "isotropic") {
        allow_keys(m, {"type", "Y", "nu"}, ctx);
        out["Y"] = get_num(m, "Y", ctx, 1.0);
        out["nu"] = get_num(m, "nu", ctx);
    } else if (type == "profile") {
        allow_keys(m, {"type", "profile", "Y_low", "Y_high", "nu", "y0", "zeta"}, ctx);
        out["profile"] = get_str(m, "profile", ctx);
        one_of(out["profile"].get<std::string>(), {"constant", "discontinuous", "ramp"}, ctx + ".profile");
        out["Y_low"] = get_num(m, "Y_low", ctx);
        out["Y_high"] = get_num(m, "Y_high", ctx);
        out["nu"] = get_num(m, "nu", ctx);
        out["y0"] = get_num(m, "y0", ctx, 0.5);
        out["zeta"] = get_num(m, "zeta", ctx, 0.05);
    } else {
        allow_keys(m, {"type", "Yx", "Yy", "nuxy", "Gxy"}, ctx);
        out["Yx"] = get_num(m, "Yx", ctx);
        out["Yy"] = get_num(m, "Yy", ctx);
        out["nuxy"] = get_num(m, "nuxy", ctx);
        out["Gxy"] = get_num(m, "Gxy", ctx);
    }
    return out;
}

Json validate_particular(const Json& p, const std::string& ctx, bool nested)
{
    std::string recipe = get_str(p, "recipe", ctx);
    one_of(recipe, {"axisym_airy", "band", "gravity", "annulus_m1", "uniform", "oracle"}, ctx + ".recipe");
    Json out = {{"recipe", recipe}};
    if (recipe == "axisym_airy") {
        allow_keys(p, {"recipe", "p_in", "p_out"}, ctx);
        out["p_in"] = get_num(p, "p_in", ctx);
        out["p_out"] = get_num(p, "p_out", ctx, 0.0);
    } else if (recipe == "band") {
        allow_keys(p, {"recipe", "p", "profile"}, ctx);
        out["p"] = get_num(p, "p", ctx);
        out["profile"] = get_str(p, "profile", ctx);
        one_of(out["profile"].get<std::string>(), {"discontinuous", "quartic"}, ctx + ".profile");
    } else if (recipe == "gravity") {
        allow_keys(p, {"recipe", "rho1", "rho2", "g"}, ctx);
        out["rho1"] = get_num(p, "rho1", ctx);
        out["rho2"] = get_num(p, "rho2", ctx);
        out["g"] = get_num(p, "g", ctx);
    } else if (recipe == "annulus_m1") {
        allow_keys(p, {"recipe"}, ctx);
    } else if (recipe == "uniform") {
        allow_keys(p, {"recipe", "sxx", "syy", "sxy"}, ctx);
        out["sxx"] = get_num(p, "sxx", ctx, 0.0);
        out["syy"] = get_num(p, "syy", ctx, 0.0);
        out["sxy"] = get_num(p, "sxy", ctx, 0.0);
    } else {
        if (nested) fail(ctx, "oracle recipes cannot be nested");
        allow_keys(p, {"recipe", "principle", "N", "material", "particular"}, ctx);
        out["principle"] = get_str(p, "principle", ctx, std::string("PT"));
        one_of(out["principle"].get<std::string>(), {"SE", "PT", "PT_body"}, ctx + ".principle");
        out["N"] = get_int(p, "N", ctx);
        if (out["N"].get<int>() < 0) fail(ctx, "N must be non-negative");
        if (!p.contains("material") || !p.contains("particular")) fail(ctx, "needs 'material' and 'particular'");
        out["material"] = validate_material(p.at("material"), ctx + ".material");
        out["particular"] = validate_particular(p.at("particular"), ctx + ".particular", true);
    }
    return out;
}

Json validate_check(const Json& c, const std::string& ctx, const std::set<std::string>& principles, int N)
{
    std::string type = get_str(c, "type", ctx);
    one_of(type,
           {"energy_rel", "error_at", "monotone", "slope", "plateau", "error_ratio", "cesaro", "span_agreement",
            "galerkin", "equilibrium", "basis"},
           ctx + ".type");
    Json out = {{"type", type}};
    auto principle = [&](const char* key) {
        std::string p = get_str(c, key, ctx);
        if (!principles.count(p)) fail(ctx, "principle '" + p + "' is not run by this experiment");
        return p;
    };
    auto step = [&](const char* key, std::optional<int> def = std::nullopt) {
        int n = get_int(c, key, ctx, def);
        if (n < 0 || n > N) fail(ctx, std::string("'") + key + "' must lie in [0, N]");
        return n;
    };
    if (type == "energy_rel") {
        allow_keys(c, {"type", "principle", "N", "tol"}, ctx);
        out["principle"] = principle("principle");
        out["N"] = step("N");
        out["tol"] = get_num(c, "tol", ctx);
    } else if (type == "error_at") {
        allow_keys(c, {"type", "principle", "N", "expected", "tol"}, ctx);
        out["principle"] = principle("principle");
        out["N"] = step("N");
        out["expected"] = get_num(c, "expected", ctx);
        out["tol"] = get_num(c, "tol", ctx);
    } else if (type == "monotone") {
        allow_keys(c, {"type", "principle", "column", "tol"}, ctx);
        out["principle"] = principle("principle");
        out["column"] = get_str(c, "column", ctx);
        one_of(out["column"].get<std::string>(), {"objective", "energy", "E_N"}, ctx + ".column");
        out["tol"] = get_num(c, "tol", ctx, 1e-10);
    } else if (type == "slope") {
        allow_keys(c, {"type", "principle", "expected", "tol"}, ctx);
        out["principle"] = principle("principle");
        out["expected"] = get_num(c, "expected", ctx);
        out["tol"] = get_num(c, "tol", ctx);
    } else if (type == "plateau") {
        allow_keys(c, {"type", "principle", "from", "to", "min_ratio"}, ctx);
        out["principle"] = principle("principle");
        out["from"] = step("from");
        out["to"] = step("to");
        out["min_ratio"] = get_num(c, "min_ratio", ctx);
    } else if (type == "error_ratio") {
        allow_keys(c, {"type", "principle", "other", "N", "max_ratio"}, ctx);
        out["principle"] = principle("principle");
        out["other"] = principle("other");
        out["N"] = step("N");
        out["max_ratio"] = get_num(c, "max_ratio", ctx);
    } else if (type == "cesaro") {
        allow_keys(c, {"type", "principle", "component", "expected", "rel_tol", "abs_tol", "radius", "segments"},
                   ctx);
        out["principle"] = principle("principle");
        out["component"] = get_int(c, "component", ctx);
        if (out["component"] != 1 && out["component"] != 2) fail(ctx, "component must be 1 or 2");
        if (!c.contains("expected")) fail(ctx, "missing 'expected'");
        const Json& e = c.at("expected");
        if (e.is_string()) {
            if (e.get<std::string>() != "hole_resultant") fail(ctx, "expected must be a number or 'hole_resultant'");
        } else if (!e.is_number()) {
            fail(ctx, "expected must be a number or 'hole_resultant'");
        }
        out["expected"] = e;
        if (c.contains("rel_tol") == c.contains("abs_tol")) fail(ctx, "give exactly one of rel_tol and abs_tol");
        if (c.contains("rel_tol")) out["rel_tol"] = get_num(c, "rel_tol", ctx);
        else out["abs_tol"] = get_num(c, "abs_tol", ctx);
        if (c.contains("radius")) out["radius"] = get_num(c, "radius", ctx);
        out["segments"] = get_int(c, "segments", ctx, 64);
    } else if (type == "span_agreement") {
        allow_keys(c, {"type", "principle", "n", "N", "tol"}, ctx);
        out["principle"] = principle("principle");
        if (out["principle"] != "SE") fail(ctx, "span agreement compares strain-energy solutions");
        out["n"] = get_int(c, "n", ctx);
        out["N"] = step("N", N);
        out["tol"] = get_num(c, "tol", ctx);
    } else if (type == "galerkin") {
        allow_keys(c, {"type", "principle", "tol"}, ctx);
        out["principle"] = principle("principle");
        if (out["principle"] != "SE") fail(ctx, "Galerkin orthogonality applies to the strain-energy principle");
        out["tol"] = get_num(c, "tol", ctx, 1e-8);
    } else if (type == "equilibrium") {
        allow_keys(c, {"type", "principle", "tol"}, ctx);
        out["principle"] = principle("principle");
        out["tol"] = get_num(c, "tol", ctx, 1e-8);
    } else {
        allow_keys(c, {"type"}, ctx);
    }
    return out;
}

Json validate(const Json& in)
{
    const std::string ctx = "config";
    allow_keys(in,
               {"name", "description", "domain", "mesh", "basis", "material", "particular", "principles", "N",
                "schedule", "report_every", "oracle", "slope_window", "checks", "output", "full", "full_scale"},
               ctx);
    Json d;
    d["name"] = get_str(in, "name", ctx);
    if (d["name"].get<std::string>().empty()) fail(ctx, "name must not be empty");
    d["description"] = get_str(in, "description", ctx, std::string());
    d["full_scale"] = in.value("full_scale", false);

    // domain
    if (!in.contains("domain")) fail(ctx, "missing 'domain'");
    const Json& dom = in.at("domain");
    std::string dtype = get_str(dom, "type", "domain");
    one_of(dtype, {"rectangle", "annulus"}, "domain.type");
    const bool annulus = dtype == "annulus";
    if (annulus) {
        allow_keys(dom, {"type", "ra", "rb"}, "domain");
        d["domain"] = {{"type", dtype}, {"ra", get_num(dom, "ra", "domain")}, {"rb", get_num(dom, "rb", "domain")}};
    } else {
        allow_keys(dom, {"type", "Lx", "Ly"}, "domain");
        d["domain"] = {{"type", dtype}, {"Lx", get_num(dom, "Lx", "domain")}, {"Ly", get_num(dom, "Ly", "domain")}};
    }

    // mesh
    const Json mesh = in.value("mesh", Json::object());
    if (annulus) {
        allow_keys(mesh, {"nr", "quad_order"}, "mesh");
        d["mesh"] = {{"nr", get_int(mesh, "nr", "mesh", 128)}, {"quad_order", get_int(mesh, "quad_order", "mesh", 0)}};
        if (d["mesh"]["nr"].get<int>() < 1) fail("mesh", "nr must be positive");
    } else {
        allow_keys(mesh, {"nx", "ny", "features", "quad_order"}, "mesh");
        d["mesh"] = {{"nx", get_int(mesh, "nx", "mesh", 48)},
                     {"ny", get_int(mesh, "ny", "mesh", 48)},
                     {"features", Json::array()},
                     {"quad_order", get_int(mesh, "quad_order", "mesh", 0)}};
        if (d["mesh"]["nx"].get<int>() < 1 || d["mesh"]["ny"].get<int>() < 1) fail("mesh", "nx, ny must be positive");
        if (mesh.contains("features")) {
            if (!mesh.at("features").is_array()) fail("mesh.features", "expected an array");
            for (const auto& f : mesh.at("features")) {
                if (!f.is_array() || f.size() != 2 || !f[0].is_string() || !f[1].is_number())
                    fail("mesh.features", "entries must be [\"x\"|\"y\", value]");
                one_of(f[0].get<std::string>(), {"x", "y"}, "mesh.features");
                d["mesh"]["features"].push_back(f);
            }
        }
    }
    if (d["mesh"]["quad_order"].get<int>() < 0) fail("mesh", "quad_order must be non-negative (0 = automatic)");

    // basis
    const Json basis = in.value("basis", Json::object());
    allow_keys(basis, {"backend", "n_modes", "wavenumbers", "sin_family", "spectral_size", "degenerate_threshold"},
               "basis");
    d["basis"] = {{"backend", get_str(basis, "backend", "basis", std::string("eigen"))},
                  {"n_modes", get_int(basis, "n_modes", "basis", 20)},
                  {"spectral_size", get_int(basis, "spectral_size", "basis", 0)},
                  {"degenerate_threshold", get_num(basis, "degenerate_threshold", "basis", 1e-6)}};
    one_of(d["basis"]["backend"].get<std::string>(), {"eigen", "bump"}, "basis.backend");
    if (d["basis"]["n_modes"].get<int>() < 1) fail("basis", "n_modes must be positive");
    if (annulus) {
        if (d["basis"]["backend"] != "eigen") fail("basis", "the annulus supports only the eigen backend");
        Json ms = basis.value("wavenumbers", Json::array({0, 1, 2, 3, 4, 5, 6}));
        if (!ms.is_array() || ms.empty()) fail("basis.wavenumbers", "expected a non-empty array");
        for (const auto& m : ms)
            if (!m.is_number_integer() || m.get<int>() < 0) fail("basis.wavenumbers", "entries must be integers >= 0");
        d["basis"]["wavenumbers"] = ms;
        if (basis.contains("sin_family") && !basis.at("sin_family").is_boolean())
            fail("basis", "'sin_family' must be a boolean");
        d["basis"]["sin_family"] = basis.value("sin_family", true);
    } else if (basis.contains("wavenumbers") || basis.contains("sin_family")) {
        fail("basis", "wavenumbers apply to the annulus only");
    }

    if (!in.contains("material")) fail(ctx, "missing 'material'");
    d["material"] = validate_material(in.at("material"), "material");
    if (!in.contains("particular")) fail(ctx, "missing 'particular'");
    d["particular"] = validate_particular(in.at("particular"), "particular", false);
    const std::string recipe = d["particular"]["recipe"];
    const bool radial_recipe = recipe == "axisym_airy" || recipe == "annulus_m1";
    if (annulus != radial_recipe) fail("particular", "recipe '" + recipe + "' does not match the domain");
    if (annulus && d["material"]["type"] != "isotropic")
        fail("material", "annulus experiments need a homogeneous isotropic material");

    // principles
    if (!in.contains("principles") || !in.at("principles").is_array() || in.at("principles").empty())
        fail(ctx, "'principles' must be a non-empty array");
    std::set<std::string> pset;
    for (const auto& p : in.at("principles")) {
        if (!p.is_string()) fail("principles", "entries must be strings");
        one_of(p.get<std::string>(), {"SE", "PT", "PT_body"}, "principles");
        if (!pset.insert(p.get<std::string>()).second) fail("principles", "duplicate principle");
    }
    d["principles"] = in.at("principles");
    if (pset.count("PT_body") && recipe != "gravity") fail("principles", "PT_body needs a body-force recipe");
    if (pset.count("PT_body") && d["material"]["type"] == "orthotropic")
        fail("principles", "PT_body needs an isotropic material");

    d["N"] = get_int(in, "N", ctx);
    const int N = d["N"];
    if (N < 0) fail(ctx, "N must be non-negative");
    if (N > d["basis"]["n_modes"].get<int>()) fail(ctx, "N exceeds basis.n_modes");
    d["report_every"] = get_int(in, "report_every", ctx, 1);
    if (d["report_every"].get<int>() < 1) fail(ctx, "report_every must be positive");
    if (in.contains("schedule")) {
        const Json& s = in.at("schedule");
        if (!s.is_array() || s.empty()) fail("schedule", "expected a non-empty array");
        int prev = -1;
        for (const auto& v : s) {
            if (!v.is_number_integer()) fail("schedule", "entries must be integers");
            int n = v.get<int>();
            if (n <= prev) fail("schedule", "N schedule must be strictly increasing");
            if (n > N) fail("schedule", "entries must not exceed N");
            prev = n;
        }
        d["schedule"] = s;
    }

    // oracle
    const Json oracle = in.value("oracle", Json{{"type", "none"}});
    allow_keys(oracle, {"type", "refine", "quad_order"}, "oracle");
    std::string otype = get_str(oracle, "type", "oracle");
    one_of(otype, {"none", "lame", "annulus_m1", "fem"}, "oracle.type");
    d["oracle"] = {{"type", otype}};
    if (otype == "lame" && (recipe != "axisym_airy"))
        fail("oracle", "the Lame oracle matches the axisym_airy recipe only");
    if (otype == "annulus_m1" && recipe != "annulus_m1") fail("oracle", "annulus_m1 oracle needs the annulus_m1 recipe");
    if (otype == "fem") {
        if (annulus) fail("oracle", "the displacement FEM oracle runs on rectangles only");
        d["oracle"]["refine"] = get_int(oracle, "refine", "oracle", 2);
        d["oracle"]["quad_order"] = get_int(oracle, "quad_order", "oracle", 4);
        if (d["oracle"]["refine"].get<int>() < 1 || d["oracle"]["quad_order"].get<int>() < 2)
            fail("oracle", "refine >= 1 and quad_order >= 2 required");
    }

    // slope window
    if (in.contains("slope_window")) {
        const Json& w = in.at("slope_window");
        if (!w.is_array() || w.size() != 2 || !w[0].is_number_integer() || !w[1].is_number_integer())
            fail("slope_window", "expected [lo, hi]");
        if (!(w[0].get<int>() >= 1 && w[0].get<int>() < w[1].get<int>() && w[1].get<int>() <= N))
            fail("slope_window", "need 1 <= lo < hi <= N");
        d["slope_window"] = w;
    }

    d["checks"] = Json::array();
    if (in.contains("checks")) {
        if (!in.at("checks").is_array()) fail("checks", "expected an array");
        int i = 0;
        for (const auto& c : in.at("checks")) {
            Json v = validate_check(c, "checks[" + std::to_string(i++) + "]", pset, N);
            const std::string t = v["type"];
            if ((t == "slope" || t == "energy_rel" || t == "error_at" || t == "plateau" || t == "error_ratio" ||
                 (t == "monotone" && v["column"] == "E_N")) &&
                otype == "none")
                fail("checks", "check '" + t + "' needs an oracle");
            if (t == "slope" && !d.contains("slope_window")) fail("checks", "slope check needs a slope_window");
            if (t == "cesaro" && !annulus) fail("checks", "Cesaro checks need an annulus");
            if (t == "span_agreement" && annulus) fail("checks", "span agreement uses the rectangle bump basis");
            d["checks"].push_back(v);
        }
    }
    if (in.contains("output")) d["output"] = get_str(in, "output", ctx);
    return d;
}

// ---------------------------------------------------------------------------------------------
// construction

Material make_material(const Json& m)
{
    const std::string type = m["type"];
    try {
        if (type == "isotropic") return isotropic(m["Y"].get<double>(), m["nu"].get<double>());
        if (type == "profile")
            return isotropic_profile(m["profile"].get<std::string>(), m["Y_low"].get<double>(),
                                     m["Y_high"].get<double>(), m["nu"].get<double>(), m["y0"].get<double>(),
                                     m["zeta"].get<double>());
        return orthotropic(m["Yx"].get<double>(), m["Yy"].get<double>(), m["nuxy"].get<double>(),
                           m["Gxy"].get<double>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("material: ") + e.what());
    }
}

Domain make_domain(const Json& d)
{
    Domain dom;
    if (d["type"] == "annulus") dom = Annulus{d["ra"].get<double>(), d["rb"].get<double>()};
    else dom = Rectangle{d["Lx"].get<double>(), d["Ly"].get<double>()};
    try {
        validate_domain(dom);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("domain: ") + e.what());
    }
    return dom;
}

MeshPtr make_mesh(const Json& doc)
{
    const Json& m = doc["mesh"];
    const Json& b = doc["basis"];
    Domain dom = make_domain(doc["domain"]);
    const int n_modes = b["n_modes"];
    int q = m["quad_order"];
    if (std::holds_alternative<Annulus>(dom)) {
        const int nr = m["nr"];
        int K = b["spectral_size"].get<int>() > 0 ? b["spectral_size"].get<int>() : default_radial_spectral_size(n_modes);
        if (q == 0) q = recommended_quadrature_order(K, nr, MeshKind::Radial);
        return build_radial_grid(dom, nr, q);
    }
    const int nx = m["nx"], ny = m["ny"];
    int K = b["spectral_size"].get<int>() > 0 ? b["spectral_size"].get<int>()
                                               : default_rectangle_spectral_size(n_modes);
    if (b["backend"] == "bump") K = std::max(K, static_cast<int>(std::ceil(std::sqrt(double(n_modes)))) + 4);
    if (q == 0) q = recommended_quadrature_order(K, std::min(nx, ny), MeshKind::Rectangle);
    std::vector<FeatureLine> lines;
    for (const auto& f : m["features"]) lines.push_back({f[0].get<std::string>()[0], f[1].get<double>()});
    return build_rectangle_mesh(dom, nx, ny, lines, q);
}

ParticularStress make_uniform(const MeshPtr& mesh, const Sym2& s)
{
    LoadingSpec L;
    L.tractions.push_back({"left", [s](double, double) { return Vec2{-s.a, -s.c}; }, "uniform"});
    L.tractions.push_back({"right", [s](double, double) { return Vec2{s.a, s.c}; }, "uniform"});
    L.tractions.push_back({"bottom", [s](double, double) { return Vec2{-s.c, -s.b}; }, "uniform"});
    L.tractions.push_back({"top", [s](double, double) { return Vec2{s.c, s.b}; }, "uniform"});
    L.description = "uniform stress (" + fmt17(s.a) + ", " + fmt17(s.b) + ", " + fmt17(s.c) + ")";
    ParticularStress p{constant_field(mesh, s), L, "uniform"};
    check_particular(p.field, p.loading);
    return p;
}

Approximation solve_principle(Principle pr, const ParticularStress& p, const BasisSet& basis, const Material& mat,
                              int N, const SymTensorField2* reference)
{
    switch (pr) {
        case Principle::SE: {
            Approximation a = solve_strain_energy(p.field, basis, mat, N, reference);
            return a;
        }
        case Principle::PT: {
            Approximation a = solve_planar_trace(p.field, basis, N);
            attach_energy_diagnostics(a, basis, mat, reference);
            return a;
        }
        case Principle::PTBody: {
            if (!p.loading.body) throw std::invalid_argument("PT_body needs a body force");
            if (!(mat.kind == Material::Kind::Isotropic))
                throw std::invalid_argument("PT_body needs an isotropic material");
            auto pot = p.loading.body->potential;
            ScalarField V = sample_scalar(pot, p.field.mesh());
            Approximation a = solve_planar_trace_body(p.field, basis, V, mat.nu, N);
            attach_energy_diagnostics(a, basis, mat, reference);
            return a;
        }
    }
    throw std::logic_error("unhandled principle");
}

ParticularStress make_particular(const Json& p, const MeshPtr& mesh, const BasisSet* basis)
{
    const std::string r = p["recipe"];
    if (r == "axisym_airy") return axisym_airy_particular(mesh, p["p_in"].get<double>(), p["p_out"].get<double>());
    if (r == "band")
        return band_pressure_particular(mesh, p["p"].get<double>(),
                                        band_profile_from_string(p["profile"].get<std::string>()));
    if (r == "gravity")
        return gravity_particular(mesh, p["rho1"].get<double>(), p["rho2"].get<double>(), p["g"].get<double>());
    if (r == "annulus_m1") return annulus_m1_particular(mesh);
    if (r == "uniform")
        return make_uniform(mesh, Sym2{p["sxx"].get<double>(), p["syy"].get<double>(), p["sxy"].get<double>()});
    // "oracle": an approximate solution of a related problem, used as the particular stress
    if (!basis) throw std::logic_error("oracle recipe needs the basis");
    ParticularStress inner = make_particular(p["particular"], mesh, nullptr);
    Material m = make_material(p["material"]);
    const int N = p["N"];
    if (N > static_cast<int>(basis->size())) throw ConfigError("particular.N exceeds the basis size");
    Approximation a = solve_principle(principle_from_string(p["principle"].get<std::string>()), inner, *basis, m, N,
                                      nullptr);
    return oracle_as_particular(a.sigma_N, inner.loading,
                                p["principle"].get<std::string>() + " solution (N=" + std::to_string(N) + ", " +
                                    m.describe() + ") of " + inner.construction);
}

std::optional<OracleSolution> make_oracle(const Json& doc, const MeshPtr& mesh, const Material& mat,
                                          const ParticularStress& p)
{
    const Json& o = doc["oracle"];
    const std::string t = o["type"];
    if (t == "none") return std::nullopt;
    if (t == "lame") {
        const auto& a = std::get<Annulus>(mesh->domain);
        if (doc["particular"]["p_out"].get<double>() != 0.0)
            throw ConfigError("oracle: the Lame oracle assumes a traction-free outer boundary");
        return lame_oracle(a.ra, a.rb, doc["particular"]["p_in"].get<double>(), mat);
    }
    if (t == "annulus_m1") {
        const auto& a = std::get<Annulus>(mesh->domain);
        return annulus_m1_oracle(a.ra, a.rb, mat.nu, mat.Y);
    }
    FemOptions fo;
    fo.refine = o["refine"];
    fo.quad_order = o["quad_order"];
    return displacement_fem_oracle(*mesh, p.loading, mat, fo);
}

std::string basis_cache_key(const Json& doc, const MeshPtr& mesh)
{
    return hex64(fnv1a(mesh->hash() + "|" + doc["basis"].dump()));
}

// ---------------------------------------------------------------------------------------------
// checks

const PrincipleResult& find_result(const ExperimentReport& r, const std::string& name)
{
    const Principle p = principle_from_string(name);
    for (const auto& x : r.results)
        if (x.principle == p) return x;
    throw std::logic_error("principle " + name + " was not run");
}

double column_value(const StepDiagnostics& s, const std::string& col)
{
    if (col == "objective") return s.objective;
    if (col == "energy") return s.energy;
    return s.error;
}

CheckResult evaluate_check(const Json& c, const ExperimentReport& rep, const BasisSet& basis, const Material& mat,
                           const ParticularStress& part, const SymTensorField2* truth)
{
    CheckResult out;
    const std::string type = c["type"];
    out.name = type;
    if (c.contains("principle")) out.principle = c["principle"];
    if (type == "basis") {
        out.value = rep.basis_report.pass() ? 1.0 : 0.0;
        out.expected = 1.0;
        out.pass = rep.basis_report.pass();
        out.detail = rep.basis_report.summary();
        return out;
    }
    const PrincipleResult& pr = find_result(rep, out.principle);
    const auto& steps = pr.approx.steps;
    if (type == "energy_rel") {
        const int n = c["N"];
        out.name += "@N=" + std::to_string(n);
        out.value = std::abs(steps[n].energy - rep.reference_energy) / rep.reference_energy;
        out.tolerance = c["tol"];
        out.pass = out.value <= out.tolerance;
        out.detail = "energy " + fmt17(steps[n].energy) + " vs oracle " + fmt17(rep.reference_energy);
    } else if (type == "error_at") {
        const int n = c["N"];
        out.name += "@N=" + std::to_string(n);
        out.value = steps[n].error;
        out.expected = c["expected"];
        out.tolerance = c["tol"];
        out.pass = std::abs(out.value - out.expected) <= out.tolerance;
    } else if (type == "monotone") {
        const std::string col = c["column"];
        out.name += ":" + col;
        const double scale = std::max(std::abs(column_value(steps.front(), col)), 1e-300);
        double worst = 0.0;
        for (std::size_t i = 1; i < steps.size(); ++i)
            worst = std::max(worst, (column_value(steps[i], col) - column_value(steps[i - 1], col)) / scale);
        out.value = worst;
        out.tolerance = c["tol"];
        out.pass = worst <= out.tolerance;
        out.detail = "largest relative increase between consecutive N";
    } else if (type == "slope") {
        out.value = pr.slope.value_or(std::numeric_limits<double>::quiet_NaN());
        out.expected = c["expected"];
        out.tolerance = c["tol"];
        out.pass = std::abs(out.value - out.expected) <= out.tolerance;
        out.detail = "window [" + std::to_string(rep.slope_window.first) + ", " +
                     std::to_string(rep.slope_window.second) + "]";
    } else if (type == "plateau") {
        const int a = c["from"], b = c["to"];
        out.name += "@" + std::to_string(a) + "->" + std::to_string(b);
        out.value = steps[b].error / steps[a].error;
        out.expected = c["min_ratio"];
        out.pass = out.value >= out.expected;
        out.detail = "E_N ratio must be at least expected";
    } else if (type == "error_ratio") {
        const int n = c["N"];
        const PrincipleResult& other = find_result(rep, c["other"].get<std::string>());
        out.name += "@N=" + std::to_string(n) + " vs " + c["other"].get<std::string>();
        out.value = steps[n].error / other.approx.steps[n].error;
        out.expected = c["max_ratio"];
        out.pass = out.value <= out.expected;
        out.detail = "E_N ratio must not exceed expected";
    } else if (type == "cesaro") {
        const auto& ann = std::get<Annulus>(basis.mesh->domain);
        const double radius = c.contains("radius") ? c["radius"].get<double>() : 0.5 * (ann.ra + ann.rb);
        CesaroLoop loop = circle_loop(radius, c["segments"].get<int>());
        validate_loop(loop, ann);
        const int comp = c["component"];
        out.name += ":F" + std::to_string(comp);
        out.value = cesaro_diagnostic(pr.approx.sigma_N, loop, mat)[comp - 1];
        if (c["expected"].is_string()) {
            // F_1 pairs with the hole's y-resultant, F_2 with its x-resultant
            Resultants res = compute_resultants(part.loading, *basis.mesh);
            double hole = 0.0;
            for (const auto& b : res.boundaries)
                if (b.tag == "inner") hole = comp == 1 ? b.fy : b.fx;
            out.expected = (1.0 + mat.nu) / mat.Y * hole;
            out.detail = "hole resultant " + fmt17(hole);
        } else {
            out.expected = c["expected"];
        }
        if (c.contains("rel_tol")) {
            out.tolerance = c["rel_tol"];
            out.pass = std::abs(out.value - out.expected) <= out.tolerance * std::abs(out.expected);
            out.detail += (out.detail.empty() ? "" : "; ") + std::string("relative tolerance");
        } else {
            out.tolerance = c["abs_tol"];
            out.pass = std::abs(out.value - out.expected) <= out.tolerance;
        }
    } else if (type == "span_agreement") {
        const int n = c["n"], N = c["N"];
        out.name += "@N=" + std::to_string(N) + " vs bump n=" + std::to_string(n);
        BasisSet bump = airy_bump_basis(basis.mesh, n);
        Approximation ab = solve_strain_energy(part.field, bump, mat, static_cast<int>(bump.size()), truth);
        const double e_eig = steps[N].energy, e_bump = ab.steps.back().energy;
        out.value = std::abs(e_eig - e_bump) / e_eig;
        out.tolerance = c["tol"];
        out.pass = out.value <= out.tolerance;
        out.detail = "eigen " + fmt17(e_eig) + ", bump " + fmt17(e_bump) + " (" + std::to_string(bump.size()) + " modes)";
    } else if (type == "galerkin") {
        const SymTensorField2& s = pr.approx.sigma_N;
        const double ns = std::sqrt(strain_energy(mat, s));
        double worst = 0.0;
        for (int i = 0; i < pr.approx.N(); ++i) {
            const auto& phi = basis.modes[static_cast<std::size_t>(i)].field;
            if (phi.tag() != s.tag()) continue;
            worst = std::max(worst, std::abs(energy_inner(mat, s, phi)) / (ns * std::sqrt(strain_energy(mat, phi))));
        }
        out.value = worst;
        out.tolerance = c["tol"];
        out.pass = worst <= out.tolerance;
        out.detail = "max |<C^-1 sigma_N, phi_i>| relative to the energy norms";
    } else if (type == "equilibrium") {
        EquilibriumResidual r = equilibrium_residual(pr.approx.sigma_N, part.loading);
        double sup = 0.0;
        for (const auto& v : pr.approx.sigma_N.values())
            sup = std::max({sup, std::abs(v.a), std::abs(v.b), std::abs(v.c)});
        out.value = std::max(r.interior_norm / std::max(r.field_norm, 1e-300), r.boundary_mismatch / std::max(1.0, sup));
        out.tolerance = c["tol"];
        out.pass = out.value <= out.tolerance;
        out.detail = "interior " + fmt17(r.interior_norm) + ", boundary " + fmt17(r.boundary_mismatch);
    }
    return out;
}

std::string convergence_csv(const Approximation& a, const std::vector<int>& rows)
{
    std::ostringstream os;
    os << "N,a_N,objective,energy,E_N\n";
    auto num = [](double v) { return std::isfinite(v) ? fmt17(v) : std::string("nan"); };
    for (int n : rows) {
        const auto& s = a.steps[static_cast<std::size_t>(n)];
        os << s.n << "," << num(s.a_n) << "," << num(s.objective) << "," << num(s.energy) << "," << num(s.error)
           << "\n";
    }
    return os.str();
}

std::vector<int> schedule_rows(const Json& doc)
{
    const int N = doc["N"];
    std::vector<int> rows;
    if (doc.contains("schedule")) {
        for (const auto& v : doc["schedule"]) rows.push_back(v.get<int>());
        return rows;
    }
    const int every = doc["report_every"];
    for (int n = 0; n <= N; n += every) rows.push_back(n);
    if (rows.back() != N) rows.push_back(N);
    return rows;
}

}  // namespace

// ---------------------------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::from_json(const Json& j, bool full)
{
    Json doc = j;
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    if (full && doc.contains("full")) {
        Json patch = doc["full"];
        doc.erase("full");
        doc.merge_patch(patch);
        doc["full_scale"] = true;
    } else if (full) {
        doc["full_scale"] = true;
    }
    if (doc.contains("full")) {
        if (!doc["full"].is_object()) throw ConfigError("config: 'full' must be an object");
        doc.erase("full");
    }
    ExperimentConfig c;
    c.doc = validate(doc);
    make_domain(c.doc["domain"]);
    Material m = make_material(c.doc["material"]);
    try {
        validate(m);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("material: ") + e.what());
    }
    return c;
}

std::vector<std::string> preset_names()
{
    std::vector<std::string> names;
    for (const auto& p : kPresetText) names.emplace_back(p[0]);
    if (names.empty()) throw std::logic_error("preset registry is empty");
    return names;
}

Json preset_json(const std::string& name)
{
    for (const auto& p : kPresetText)
        if (name == p[0]) return Json::parse(p[1]);
    std::string list;
    for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "'; available presets: " + list);
}

ExperimentConfig preset(const std::string& name, bool full)
{
    return ExperimentConfig::from_json(preset_json(name), full);
}

std::string list_presets(bool plain)
{
    std::ostringstream os;
    for (const auto& n : preset_names()) {
        if (plain) {
            os << n << "\n";
        } else {
            Json j = preset_json(n);
            os << n << std::string(n.size() < 24 ? 24 - n.size() : 1, ' ') << j.value("description", "") << "\n";
        }
    }
    return os.str();
}

double fit_slope(const std::vector<std::pair<int, double>>& series, int lo, int hi)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (const auto& [n, e] : series) {
        if (n < lo || n > hi) continue;
        if (n <= 0) throw std::invalid_argument("fit_slope: N must be positive");
        if (!(e > 0.0)) throw std::invalid_argument("fit_slope: E_N must be positive in the window");
        const double x = std::log(static_cast<double>(n)), y = std::log(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++k;
    }
    if (k == 0) throw std::invalid_argument("fit_slope: empty window");
    if (k < 5) throw std::invalid_argument("fit_slope: fewer than 5 points in the window");
    const double den = k * sxx - sx * sx;
    if (!(den > 0.0)) throw std::invalid_argument("fit_slope: window needs distinct N values");
    return (k * sxy - sx * sy) / den;
}

bool ExperimentReport::pass() const
{
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

Json ExperimentReport::to_json() const
{
    Json j;
    j["name"] = name;
    j["full_scale"] = full;
    j["provenance"] = {{"basis_hash", provenance.hash()},
                       {"backend", provenance.backend},
                       {"params", provenance.params},
                       {"mesh_hash", mesh_hash}};
    const BasisTolerances bt;
    j["tolerances"] = {{"basis_l2_offdiag", bt.l2_offdiag},
                       {"basis_l2_diag", bt.l2_diag},
                       {"basis_h1_offdiag", bt.h1_offdiag},
                       {"basis_equilibrium", bt.equilibrium},
                       {"basis_traction", bt.traction},
                       {"particular_equilibrium", 1e-8},
                       {"degenerate_threshold", provenance.degenerate_threshold}};
    j["basis_verification"] = {{"pass", basis_report.pass()},
                               {"max_l2_offdiag", basis_report.max_l2_offdiag},
                               {"max_l2_diag_error", basis_report.max_l2_diag_error},
                               {"max_h1_offdiag_rel", basis_report.max_h1_offdiag_rel},
                               {"max_equilibrium", basis_report.max_equilibrium},
                               {"max_traction", basis_report.max_traction},
                               {"max_trace_gram_diff", basis_report.max_trace_gram_diff}};
    if (slope_window.second > 0) j["slope_window"] = {slope_window.first, slope_window.second};
    else j["slope_window"] = nullptr;
    if (oracle) {
        j["oracle"] = {{"method", oracle->method},
                       {"resolution", oracle->resolution},
                       {"energy_on_basis_mesh", reference_energy}};
        if (std::isfinite(oracle->energy)) j["oracle"]["energy_on_oracle_mesh"] = oracle->energy;
    } else {
        j["oracle"] = nullptr;
    }
    Json pr = Json::object();
    for (const auto& r : results) {
        const auto& last = r.approx.steps.back();
        Json e = {{"N", r.approx.N()},
                  {"final_objective", last.objective},
                  {"final_energy", last.energy},
                  {"final_E_N", std::isfinite(last.error) ? Json(last.error) : Json(nullptr)},
                  {"slope", r.slope ? Json(*r.slope) : Json(nullptr)}};
        if (std::isfinite(r.approx.condition)) e["condition"] = r.approx.condition;
        pr[to_string(r.principle)] = e;
    }
    j["principles"] = pr;
    Json cs = Json::array();
    for (const auto& c : checks) {
        Json e = {{"check", c.name}};
        if (!c.principle.empty()) e["principle"] = c.principle;
        e["value"] = std::isfinite(c.value) ? Json(c.value) : Json(nullptr);
        e["expected"] = c.expected;
        e["tolerance"] = c.tolerance;
        e["pass"] = c.pass;
        if (!c.detail.empty()) e["detail"] = c.detail;
        cs.push_back(e);
    }
    j["checks"] = cs;
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    j["pass"] = pass();
    return j;
}

Domain parse_domain(const std::string& s)
{
    auto colon = s.find(':');
    if (colon == std::string::npos) throw ConfigError("domain must look like rectangle:1x1.01 or annulus:0.1,0.3");
    const std::string kind = s.substr(0, colon), rest = s.substr(colon + 1);
    try {
        Domain d;
        if (kind == "rectangle") {
            auto x = rest.find('x');
            if (x == std::string::npos) throw ConfigError("rectangle domain needs LxxLy");
            d = Rectangle{std::stod(rest.substr(0, x)), std::stod(rest.substr(x + 1))};
        } else if (kind == "annulus") {
            auto c = rest.find(',');
            if (c == std::string::npos) throw ConfigError("annulus domain needs ra,rb");
            d = Annulus{std::stod(rest.substr(0, c)), std::stod(rest.substr(c + 1))};
        } else {
            throw ConfigError("unknown domain kind '" + kind + "'");
        }
        validate_domain(d);
        return d;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("domain: ") + e.what());
    } catch (const std::out_of_range& e) {
        throw ConfigError(std::string("domain: ") + e.what());
    }
}

BasisSet build_or_load_basis(const ExperimentConfig& cfg, const MeshPtr& mesh)
{
    const Json& b = cfg.doc["basis"];
    std::string cache_path;
    if (const char* dir = std::getenv("SB_CACHE_DIR"); dir && *dir) {
        std::filesystem::create_directories(dir);
        cache_path = (std::filesystem::path(dir) / ("basis-" + basis_cache_key(cfg.doc, mesh) + ".sbb")).string();
        if (std::filesystem::exists(cache_path)) {
            try {
                BasisSet cached = load_basis(cache_path, mesh);
                if (cached.provenance.mesh_hash == mesh->hash()) return cached;
            } catch (const std::exception&) {
                // stale or unreadable cache entries are rebuilt
            }
        }
    }
    BasisSet basis;
    if (b["backend"] == "bump") {
        basis = airy_bump_basis(mesh, b["n_modes"].get<int>());
    } else {
        EigenSolveConfig ec;
        ec.n_modes = b["n_modes"];
        ec.spectral_size = b["spectral_size"];
        ec.degenerate_threshold = b["degenerate_threshold"];
        if (mesh->kind == MeshKind::Radial) {
            ec.keep_sin_family = b["sin_family"];
            basis = solve_basis_annulus(mesh, b["wavenumbers"].get<std::vector<int>>(), ec);
        } else {
            basis = solve_basis_rectangle(mesh, ec);
        }
    }
    if (!cache_path.empty()) save_basis(basis, cache_path);
    return basis;
}

ExperimentSetup prepare_setup(const ExperimentConfig& cfg, bool with_oracle)
{
    ExperimentSetup s;
    s.mesh = make_mesh(cfg.doc);
    s.material = make_material(cfg.doc["material"]);
    if (cfg.doc["particular"]["recipe"] == "oracle") {
        BasisSet basis = build_or_load_basis(cfg, s.mesh);
        basis.compute_grams();
        s.particular = make_particular(cfg.doc["particular"], s.mesh, &basis);
    } else {
        s.particular = make_particular(cfg.doc["particular"], s.mesh, nullptr);
    }
    if (with_oracle) s.oracle = make_oracle(cfg.doc, s.mesh, s.material, s.particular);
    return s;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const std::string& out_dir)
{
    const Json& doc = cfg.doc;
    ExperimentReport rep;
    rep.name = cfg.name();
    rep.full = doc["full_scale"];
    try {
        MeshPtr mesh = make_mesh(doc);
        rep.mesh_hash = mesh->hash();
        Material mat = make_material(doc["material"]);
        BasisSet basis = build_or_load_basis(cfg, mesh);
        basis.compute_grams();
        rep.provenance = basis.provenance;
        rep.basis_report = verify_basis(basis);
        const int N = doc["N"];
        if (N > static_cast<int>(basis.size()))
            throw std::runtime_error("N=" + std::to_string(N) + " exceeds the basis size " +
                                     std::to_string(basis.size()));

        ParticularStress part = make_particular(doc["particular"], mesh, &basis);
        rep.oracle = make_oracle(doc, mesh, mat, part);
        std::optional<SymTensorField2> truth;
        if (rep.oracle) {
            truth = rep.oracle->on(mesh);
            rep.reference_energy = strain_energy(mat, *truth);
        }
        if (doc.contains("slope_window")) rep.slope_window = {doc["slope_window"][0], doc["slope_window"][1]};

        for (const auto& pname : doc["principles"]) {
            PrincipleResult r;
            r.principle = principle_from_string(pname.get<std::string>());
            r.approx = solve_principle(r.principle, part, basis, mat, N, truth ? &*truth : nullptr);
            if (truth && rep.slope_window.second > 0) {
                std::vector<std::pair<int, double>> series;
                for (const auto& s : r.approx.steps) series.emplace_back(s.n, s.error);
                r.slope = fit_slope(series, rep.slope_window.first, rep.slope_window.second);
            }
            rep.results.push_back(std::move(r));
        }
        for (const auto& c : doc["checks"])
            rep.checks.push_back(evaluate_check(c, rep, basis, mat, part, truth ? &*truth : nullptr));
        rep.extra["particular"] = part.construction;
        rep.extra["material"] = mat.describe();

        if (!out_dir.empty()) {
            std::filesystem::create_directories(out_dir);
            const std::filesystem::path dir(out_dir);
            const std::vector<int> rows = schedule_rows(doc);
            const std::string head = rep.name + " basis " + rep.provenance.hash();
            write_file_atomic((dir / "sigma_p.csv").string(), field_csv(part.field, head + " sigma_p"));
            bool first = true;
            for (const auto& r : rep.results) {
                const std::string suffix = first ? "" : "_" + to_string(r.principle);
                const std::string label = head + " " + to_string(r.principle) + " N=" + std::to_string(N);
                write_file_atomic((dir / ("convergence" + suffix + ".csv")).string(), convergence_csv(r.approx, rows));
                write_file_atomic((dir / ("sigma_N" + suffix + ".csv")).string(),
                                  field_csv(r.approx.sigma_N, label + " sigma_N"));
                write_file_atomic((dir / ("sigma_h" + suffix + ".csv")).string(),
                                  field_csv(r.approx.sigma_h(), label + " sigma_h"));
                first = false;
            }
            write_file_atomic((dir / "report.json").string(), rep.to_json().dump(2) + "\n");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw std::runtime_error("experiment '" + rep.name + "': " + e.what());
    }
    return rep;
}

std::string oracle_csv(const ExperimentConfig& cfg)
{
    ExperimentSetup s = prepare_setup(cfg, true);
    if (!s.oracle) throw ConfigError("config '" + cfg.name() + "' has no oracle");
    SymTensorField2 f = s.oracle->on(s.mesh, false);
    // nodal dumps need the evaluator; on() keeps it
    return field_csv(f, "oracle " + s.oracle->method + " " + s.oracle->resolution + " config " + cfg.name() +
                            " mesh " + s.mesh->hash());
}

}  // namespace sb
