#include "stressbasis/experiments.hpp"
#include "stressbasis/util.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kNumeric = 1;
constexpr int kUsage = 2;

sb::ExperimentConfig load_config(const std::string& preset, const std::string& path, bool full)
{
    if (!preset.empty() && !path.empty()) throw sb::ConfigError("give either a preset name or --config, not both");
    if (!path.empty()) {
        sb::Json j;
        try {
            j = sb::Json::parse(sb::read_file(path));
        } catch (const sb::Json::parse_error& e) {
            throw sb::ConfigError(path + ": " + e.what());
        } catch (const std::runtime_error& e) {
            throw sb::ConfigError(e.what());
        }
        return sb::ExperimentConfig::from_json(j, full);
    }
    if (preset.empty()) throw sb::ConfigError("give a preset name or --config PATH");
    return sb::preset(preset, full);
}

int cmd_basis_build(const std::string& domain, int n, const std::string& out, int mesh_n,
                    const std::vector<int>& ms, bool nodal, const std::string& backend)
{
    sb::Domain d = sb::parse_domain(domain);
    sb::Json cfg = {{"name", "basis"}, {"N", 0}, {"principles", {"SE"}}};
    if (std::holds_alternative<sb::Annulus>(d)) {
        const auto& a = std::get<sb::Annulus>(d);
        cfg["domain"] = {{"type", "annulus"}, {"ra", a.ra}, {"rb", a.rb}};
        cfg["mesh"] = {{"nr", mesh_n > 0 ? mesh_n : 128}};
        cfg["basis"] = {{"backend", backend}, {"n_modes", n}, {"wavenumbers", ms}};
        cfg["material"] = {{"type", "isotropic"}, {"Y", 1.0}, {"nu", 0.33}};
        cfg["particular"] = {{"recipe", "axisym_airy"}, {"p_in", 0.0}};
    } else {
        const auto& r = std::get<sb::Rectangle>(d);
        cfg["domain"] = {{"type", "rectangle"}, {"Lx", r.Lx}, {"Ly", r.Ly}};
        cfg["mesh"] = {{"nx", mesh_n > 0 ? mesh_n : 48}, {"ny", mesh_n > 0 ? mesh_n : 48}};
        cfg["basis"] = {{"backend", backend}, {"n_modes", n}};
        cfg["material"] = {{"type", "isotropic"}, {"Y", 1.0}, {"nu", 0.33}};
        cfg["particular"] = {{"recipe", "uniform"}};
    }
    sb::ExperimentConfig c = sb::ExperimentConfig::from_json(cfg);
    sb::ExperimentSetup s = sb::prepare_setup(c, false);
    sb::BasisSet basis = sb::build_or_load_basis(c, s.mesh);
    sb::save_basis(basis, out, nodal);
    sb::BasisReport rep = sb::verify_basis(basis);
    std::cout << "wrote " << basis.size() << " modes to " << out << " (basis " << basis.provenance.hash() << ")\n";
    std::cout << "lambda:";
    for (std::size_t i = 0; i < std::min<std::size_t>(basis.size(), 6); ++i)
        std::cout << " " << basis.modes[i].lambda;
    std::cout << "\n" << rep.summary() << "\n";
    return rep.pass() ? kOk : kNumeric;
}

int cmd_basis_verify(const std::string& path)
{
    sb::BasisSet basis = sb::load_basis(path);
    sb::BasisReport rep = sb::verify_basis(basis);
    std::cout << path << ": " << basis.size() << " modes, backend " << basis.provenance.backend << ", basis "
              << basis.provenance.hash() << "\n"
              << rep.summary() << "\n"
              << (rep.pass() ? "PASS" : "FAIL") << "\n";
    return rep.pass() ? kOk : kNumeric;
}

int cmd_run(const std::string& preset, const std::string& config, bool full, std::string out)
{
    sb::ExperimentConfig cfg = load_config(preset, config, full);
    if (out.empty()) out = cfg.doc.value("output", "out/" + cfg.name());
    const auto t0 = std::chrono::steady_clock::now();
    sb::ExperimentReport rep = sb::run_experiment(cfg, out);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& r : rep.results) {
        std::cout << sb::to_string(r.principle) << ": final E_N " << r.approx.steps.back().error << ", energy "
                  << r.approx.steps.back().energy;
        if (r.slope) std::cout << ", slope " << *r.slope;
        std::cout << "\n";
    }
    for (const auto& c : rep.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << (c.principle.empty() ? "" : " [" + c.principle + "]")
                  << " value=" << c.value << " expected=" << c.expected << " tol=" << c.tolerance << "\n";
    std::cout << "outputs in " << out << " (" << secs << " s)\n";
    return rep.pass() ? kOk : kNumeric;
}

int cmd_oracle_build(const std::string& preset, const std::string& config, bool full, const std::string& out)
{
    sb::ExperimentConfig cfg = load_config(preset, config, full);
    std::string path = out;
    if (path.empty()) {
        const char* dir = std::getenv("SB_CACHE_DIR");
        if (!dir || !*dir) throw sb::ConfigError("give --out or set SB_CACHE_DIR");
        std::filesystem::create_directories(dir);
        path = (std::filesystem::path(dir) / ("oracle-" + cfg.name() + ".csv")).string();
    }
    sb::write_file_atomic(path, sb::oracle_csv(cfg));
    std::cout << "wrote " << path << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Residual-stress basis construction and stress approximation experiments", "sb"};
    app.require_subcommand(1);

    auto* basis = app.add_subcommand("basis", "Build or verify a stress basis");
    basis->require_subcommand(1);
    auto* bbuild = basis->add_subcommand("build", "Build a basis and write it to a cache file");
    std::string domain, out, backend = "eigen";
    int n = 20, mesh_n = 0;
    std::vector<int> ms{0, 1, 2, 3, 4, 5, 6};
    bool nodal = false;
    bbuild->add_option("--domain", domain, "rectangle:LxxLy or annulus:ra,rb")->required();
    bbuild->add_option("--n", n, "number of modes")->check(CLI::PositiveNumber);
    bbuild->add_option("--out", out, "output file")->required();
    bbuild->add_option("--mesh", mesh_n, "elements per direction (rectangle) or radial elements (annulus)");
    bbuild->add_option("--m", ms, "azimuthal wavenumbers (annulus)");
    bbuild->add_option("--backend", backend, "eigen or bump")->check(CLI::IsMember({"eigen", "bump"}));
    bbuild->add_flag("--nodal", nodal, "append nodal values of every mode");
    auto* bverify = basis->add_subcommand("verify", "Check orthonormality, equilibrium and traction of a cached basis");
    std::string vpath;
    bverify->add_option("path", vpath, "basis file")->required();

    auto* run = app.add_subcommand("run", "Run a preset or a config file");
    std::string preset, config, outdir;
    bool full = false;
    run->add_option("preset", preset, "preset name");
    run->add_option("--config", config, "JSON config file");
    run->add_flag("--full", full, "full-scale settings (preset \"full\" overrides)");
    run->add_option("--out", outdir, "output directory (default out/<name>)");

    auto* pre = app.add_subcommand("preset", "List or print embedded presets");
    pre->require_subcommand(1);
    auto* plist = pre->add_subcommand("list", "List preset names");
    bool plain = false;
    plist->add_flag("--plain", plain, "one name per line");
    auto* pdump = pre->add_subcommand("dump", "Print a preset as JSON");
    std::string dname;
    pdump->add_option("name", dname, "preset name")->required();

    auto* oracle = app.add_subcommand("oracle", "Reference solutions");
    oracle->require_subcommand(1);
    auto* obuild = oracle->add_subcommand("build", "Write the reference field of a preset as nodal CSV");
    std::string opreset, oconfig, oout;
    bool ofull = false;
    obuild->add_option("preset", opreset, "preset name");
    obuild->add_option("--config", oconfig, "JSON config file");
    obuild->add_option("--out", oout, "output CSV (default $SB_CACHE_DIR/oracle-<name>.csv)");
    obuild->add_flag("--full", ofull, "full-scale settings (preset \"full\" overrides)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*bbuild) return cmd_basis_build(domain, n, out, mesh_n, ms, nodal, backend);
        if (*bverify) return cmd_basis_verify(vpath);
        if (*run) return cmd_run(preset, config, full, outdir);
        if (*plist) {
            std::cout << sb::list_presets(plain);
            return kOk;
        }
        if (*pdump) {
            std::cout << sb::preset_json(dname).dump(2) << "\n";
            return kOk;
        }
        if (*obuild) return cmd_oracle_build(opreset, oconfig, ofull, oout);
    } catch (const sb::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    }
    return kUsage;
}
