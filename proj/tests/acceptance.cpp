// Acceptance run: one PASS/FAIL line per criterion. `--quick` skips the full-scale example1 run.
#include "stressbasis/experiments.hpp"
#include "stressbasis/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

using namespace sb;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v, int digits = 5)
{
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

struct Verdict {
    bool pass = true;
    std::vector<std::string> parts;
    void add(bool ok, const std::string& what)
    {
        pass = pass && ok;
        parts.push_back(what + (ok ? "" : " [fail]"));
    }
};

std::map<std::string, ExperimentReport> g_reports;
std::map<std::string, double> g_runtime;

const ExperimentReport& report(const std::string& name, bool full = false)
{
    const std::string key = name + (full ? "#full" : "");
    auto it = g_reports.find(key);
    if (it == g_reports.end()) {
        const auto t0 = Clock::now();
        it = g_reports.emplace(key, run_experiment(preset(name, full))).first;
        g_runtime[key] = seconds_since(t0);
    }
    return it->second;
}

const CheckResult& check(const ExperimentReport& r, const std::string& prefix, const std::string& principle = "")
{
    for (const auto& c : r.checks)
        if (c.name.rfind(prefix, 0) == 0 && (principle.empty() || c.principle == principle)) return c;
    throw std::runtime_error(r.name + ": no check '" + prefix + "'");
}

const PrincipleResult& result(const ExperimentReport& r, Principle p)
{
    for (const auto& x : r.results)
        if (x.principle == p) return x;
    throw std::runtime_error(r.name + ": principle not run");
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }

double rel(double v, double target) { return std::abs(v - target) / std::abs(target); }

BasisSet g_rect, g_annulus;

Verdict criterion1()
{
    Verdict v;
    const auto t0 = Clock::now();
    const int n = 20;
    auto mesh = build_rectangle_mesh(Rectangle{1.0, 1.01}, 48, 48, {},
                                     recommended_quadrature_order(default_rectangle_spectral_size(n), 48));
    EigenSolveConfig cfg;
    cfg.n_modes = n;
    g_rect = solve_basis_rectangle(mesh, cfg);
    const double ref[3] = {58.54, 102.37, 103.54};
    for (int i = 0; i < 3; ++i) {
        const double lam = g_rect.modes[i].lambda;
        v.add(rel(lam, ref[i]) <= 0.01, "lambda" + std::to_string(i + 1) + "=" + num(lam) + " (ref " + num(ref[i]) +
                                            ", " + num(100 * rel(lam, ref[i]), 3) + "%)");
    }
    const double t = seconds_since(t0);
    v.add(t <= 300.0, "time " + num(t, 3) + " s");
    return v;
}

Verdict criterion2()
{
    Verdict v;
    const auto t0 = Clock::now();
    const int n = 20;
    auto mesh = build_radial_grid(Annulus{0.1, 0.3}, 128,
                                  recommended_quadrature_order(default_radial_spectral_size(n), 128, MeshKind::Radial));
    EigenSolveConfig cfg;
    cfg.n_modes = n;
    g_annulus = solve_basis_annulus(mesh, {0, 1, 2, 3, 4, 5, 6}, cfg);
    const double l1 = g_annulus.modes[0].lambda;
    v.add(rel(l1, 293.34) <= 0.01, "lambda1=" + num(l1) + " m=" + std::to_string(g_annulus.modes[0].field.tag()->m) +
                                       " (ref 293.34)");
    double best = -1.0, gap = 0.0;
    int bm = -1;
    for (std::size_t i = 1; i < g_annulus.size(); ++i) {
        const auto& a = *g_annulus.modes[i - 1].field.tag();
        const auto& b = *g_annulus.modes[i].field.tag();
        if (a.m != b.m || a.m == 0 || a.parity == b.parity) continue;
        const double lam = 0.5 * (g_annulus.modes[i - 1].lambda + g_annulus.modes[i].lambda);
        if (best < 0.0 || std::abs(lam - 348.76) < std::abs(best - 348.76)) {
            best = lam;
            bm = a.m;
            gap = std::abs(g_annulus.modes[i].lambda - g_annulus.modes[i - 1].lambda) / lam;
        }
    }
    v.add(best > 0.0 && rel(best, 348.76) <= 0.01, "pair lambda=" + num(best) + " m=" + std::to_string(bm) + " (ref 348.76)");
    v.add(gap <= 1e-6, "pair gap " + num(gap, 2));
    const double t = seconds_since(t0);
    v.add(t <= 60.0, "time " + num(t, 3) + " s");
    return v;
}

Verdict criterion3(bool quick)
{
    Verdict v;
    const auto& r = report("example1");
    const auto& e10 = check(r, "energy_rel@N=10", "PT");
    v.add(e10.pass, "energy rel err at N=10 " + num(e10.value, 4) + " (tol 1e-4)");
    const auto& mono = check(r, "monotone:E_N", "PT");
    v.add(mono.pass, "E_N monotone");
    if (quick) {
        v.add(false, "full-scale slope not run (--quick)");
        return v;
    }
    const auto& f = report("example1", true);
    const double s = *result(f, Principle::PT).slope;
    v.add(within(s, -1.5, 0.3), "full-scale slope [" + std::to_string(f.slope_window.first) + "," +
                                    std::to_string(f.slope_window.second) + "] " + num(s, 4) + " (" +
                                    num(g_runtime["example1#full"], 3) + " s)");
    return v;
}

Verdict criterion4()
{
    Verdict v;
    const auto& dp = report("example2_dp");
    const auto& cp = report("example2_cp");
    const double sdp = *result(dp, Principle::PT).slope, scp = *result(cp, Principle::PT).slope;
    v.add(within(sdp, -0.22, 0.15), "DP slope " + num(sdp, 4));
    v.add(within(scp, -0.72, 0.2), "CP slope " + num(scp, 4));
    v.add(scp < sdp, "CP below DP");
    const auto& e20 = check(cp, "energy_rel@N=20");
    v.add(e20.pass, "CP energy rel err at N=20 " + num(e20.value, 4) + " (tol 0.01)");
    return v;
}

Verdict criterion5()
{
    Verdict v;
    const auto& r = report("example4");
    const auto& pr = result(r, Principle::PTBody);
    const double e0 = pr.approx.steps.front().error, eN = pr.approx.steps.back().error;
    v.add(within(e0, 0.04, 0.01), "E_0 " + num(e0, 4));
    v.add(eN < e0, "E_N " + num(eN, 4) + " at N=" + std::to_string(pr.approx.N()));
    v.add(within(*pr.slope, -0.58, 0.25), "slope " + num(*pr.slope, 4));
    return v;
}

Verdict criterion6()
{
    Verdict v;
    const auto& r = report("example5");
    const auto& plateau = check(r, "plateau", "PT");
    v.add(plateau.pass, "PT E_200/E_40 " + num(plateau.value, 5));
    const auto& ratio = check(r, "error_ratio", "SE");
    v.add(ratio.pass, "SE/PT at N=200 " + num(ratio.value, 3));
    const auto& f2 = check(r, "cesaro:F2", "PT");
    const double magnitude = (1.0 + 0.33) * M_PI * 0.1 / 1.0;
    v.add(f2.pass && rel(std::abs(f2.value), magnitude) <= 0.05,
          "PT F2 " + num(f2.value, 5) + " vs resultant-signed " + num(f2.expected, 5) + " (|.| " + num(magnitude, 5) +
              ")");
    const auto& s1 = check(r, "cesaro:F1", "SE");
    const auto& s2 = check(r, "cesaro:F2", "SE");
    v.add(s1.pass && s2.pass, "SE F " + num(s1.value, 2) + ", " + num(s2.value, 2));
    return v;
}

Verdict criterion7()
{
    Verdict v;
    const auto& dc = report("example7_dc");
    const auto& ramp = report("example7_ramp");
    const double sdc = *result(dc, Principle::SE).slope, sr = *result(ramp, Principle::SE).slope;
    v.add(within(sdc, -0.22, 0.2), "dc slope " + num(sdc, 4));
    v.add(within(sr, -0.42, 0.2), "ramp slope " + num(sr, 4));
    v.add(sr < sdc, "ramp below dc");
    const auto& e40 = check(ramp, "energy_rel@N=40", "SE");
    v.add(e40.pass, "ramp energy rel err at N=40 " + num(e40.value, 3) + " (tol 1e-3)");
    return v;
}

Verdict criterion8()
{
    Verdict v;
    // basis orthogonality and trace-Gram equality on both domains
    for (const auto* b : {&g_rect, &g_annulus}) {
        BasisReport br = verify_basis(*b);
        const std::string d = b == &g_rect ? "rect" : "annulus";
        v.add(br.max_l2_offdiag <= 1e-8 && br.max_h1_offdiag_rel <= 1e-6,
              d + " L2/H1 " + num(br.max_l2_offdiag, 2) + "/" + num(br.max_h1_offdiag_rel, 2));
        v.add(br.max_trace_gram_diff <= 1e-6, d + " trace-Gram " + num(br.max_trace_gram_diff, 2));
    }

    // compatible particular stress needs no correction
    {
        ExperimentConfig cfg = preset("example1");
        ExperimentSetup s = prepare_setup(cfg, true);
        BasisSet basis = build_or_load_basis(cfg, s.mesh);
        SymTensorField2 lame = s.oracle->on(s.mesh);
        const int N = cfg.doc["N"];
        const double a_se = solve_strain_energy(lame, basis, s.material, N).coeffs.cwiseAbs().maxCoeff();
        const double a_pt = solve_planar_trace(lame, basis, N).coeffs.cwiseAbs().maxCoeff();
        v.add(std::max(a_se, a_pt) <= 1e-8, "compatible |a| " + num(std::max(a_se, a_pt), 2));
    }

    // Galerkin orthogonality, equilibrium and monotonicity across every preset that declares them
    double galerkin = 0.0, equil = 0.0;
    bool gal_ok = true, eq_ok = true, mono_ok = true;
    for (const auto& [key, r] : g_reports) {
        for (const auto& c : r.checks) {
            if (c.name == "galerkin") {
                galerkin = std::max(galerkin, c.value);
                gal_ok = gal_ok && c.pass && c.value <= 1e-8;
            } else if (c.name == "equilibrium") {
                equil = std::max(equil, c.value);
                eq_ok = eq_ok && c.pass;
            } else if (c.name.rfind("monotone", 0) == 0) {
                mono_ok = mono_ok && c.pass;
            }
        }
        for (const auto& pr : r.results) {
            if (pr.principle != Principle::SE) continue;
            const auto& st = pr.approx.steps;
            for (std::size_t n = 1; n < st.size(); ++n)
                mono_ok = mono_ok && st[n].objective <= st[n - 1].objective + 1e-12 * std::abs(st[0].objective);
        }
    }
    v.add(gal_ok, "Galerkin " + num(galerkin, 2));

    // equilibrium of every nested approximation on the band problem
    {
        ExperimentConfig cfg = preset("example2_dp");
        ExperimentSetup s = prepare_setup(cfg, false);
        BasisSet basis = build_or_load_basis(cfg, s.mesh);
        const int N = 60;
        Approximation pt = solve_planar_trace(s.particular.field, basis, N);
        for (int n = 0; n <= N; n += 5) {
            SymTensorField2 sn = s.particular.field + basis.combination(pt.coefficients(n));
            EquilibriumResidual er = equilibrium_residual(sn, s.particular.loading);
            const double e = std::max(er.interior_norm / er.field_norm, er.boundary_mismatch);
            equil = std::max(equil, e);
            eq_ok = eq_ok && e <= 1e-8;
        }
    }
    v.add(eq_ok, "equilibrium " + num(equil, 2));
    v.add(mono_ok, "objective monotone");

    // PT coefficients do not see the material
    {
        Json j = preset_json("example1");
        j["checks"] = Json::array();
        j["principles"] = {"PT"};
        j["material"]["nu"] = 0.33;
        ExperimentReport a = run_experiment(ExperimentConfig::from_json(j));
        j["material"]["nu"] = 0.1;
        j["material"]["Y"] = 4.0;
        ExperimentReport b = run_experiment(ExperimentConfig::from_json(j));
        const bool same = a.results[0].approx.coeffs == b.results[0].approx.coeffs;
        v.add(same, same ? "PT coefficients bit-identical under nu change" : "PT coefficients differ under nu change");
    }
    return v;
}

Verdict criterion9()
{
    Verdict v;
    const auto& r = report("example8_square_ortho");
    const auto& span = check(r, "span_agreement", "SE");
    v.add(span.pass, "SE eigen vs Airy-bump energy " + num(span.value, 3) + " (tol 0.01)");
    v.add(r.pass(), "orthotropic preset checks");
    v.parts.push_back("irregular-geometry field plots not reproduced");
    return v;
}

}  // namespace

int main(int argc, char** argv)
{
    bool quick = false;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--quick") == 0) quick = true;
        else {
            std::cerr << "usage: acceptance [--quick]\n";
            return 2;
        }
    }
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"1 rectangle eigenvalues", criterion1},
        {"2 annulus eigenvalues", criterion2},
        {"3 example1 energy and slope", [quick] { return criterion3(quick); }},
        {"4 example2 regularity ordering", criterion4},
        {"5 example4 body force", criterion5},
        {"6 example5 net hole force", criterion6},
        {"7 example7 inhomogeneous modulus", criterion7},
        {"8 property suite", criterion8},
        {"9 orthotropic square", criterion9},
    };
    int failed = 0;
    for (const auto& [title, fn] : criteria) {
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v.add(false, std::string("error: ") + e.what());
        }
        std::string line;
        for (const auto& p : v.parts) line += (line.empty() ? "" : "; ") + p;
        std::cout << (v.pass ? "PASS " : "FAIL ") << title << ": " << line << std::endl;
        failed += !v.pass;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
