#include "stressbasis/experiments.hpp"
#include "stressbasis/util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>

using namespace sb;
namespace fs = std::filesystem;

namespace {

Json small_config()
{
    return Json::parse(R"({
      "name": "small_hole",
      "domain": {"type": "annulus", "ra": 0.1, "rb": 0.3},
      "mesh": {"nr": 32},
      "basis": {"backend": "eigen", "n_modes": 20, "wavenumbers": [0]},
      "material": {"type": "isotropic", "Y": 1.0, "nu": 0.33},
      "particular": {"recipe": "axisym_airy", "p_in": 1.0},
      "principles": ["PT", "SE"],
      "N": 20,
      "oracle": {"type": "lame"},
      "slope_window": [5, 20],
      "checks": [
        {"type": "monotone", "principle": "SE", "column": "energy"},
        {"type": "galerkin", "principle": "SE"},
        {"type": "basis"}
      ]
    })");
}

fs::path fresh_dir(const std::string& name)
{
    fs::path d = fs::temp_directory_path() / ("sb_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST(FitSlope, RecoversPowerLaw)
{
    std::vector<std::pair<int, double>> s;
    for (int n = 1; n <= 100; ++n) s.emplace_back(n, 3.0 * std::pow(n, -1.5));
    EXPECT_NEAR(fit_slope(s, 10, 100), -1.5, 1e-12);
    EXPECT_NEAR(fit_slope(s, 1, 5), -1.5, 1e-12);
    std::vector<std::pair<int, double>> flat;
    for (int n = 1; n <= 20; ++n) flat.emplace_back(n, 0.25);
    EXPECT_NEAR(fit_slope(flat, 1, 20), 0.0, 1e-14);
}

TEST(FitSlope, RejectsDegenerateWindows)
{
    std::vector<std::pair<int, double>> s;
    for (int n = 0; n <= 10; ++n) s.emplace_back(n, 1.0 / (n + 1));
    EXPECT_THROW(fit_slope(s, 1, 4), std::invalid_argument);
    EXPECT_THROW(fit_slope(s, 20, 30), std::invalid_argument);
    EXPECT_THROW(fit_slope(s, 0, 10), std::invalid_argument);
    s[5].second = 0.0;
    EXPECT_THROW(fit_slope(s, 1, 10), std::invalid_argument);
}

TEST(Presets, AllEightListedAndValid)
{
    const std::vector<std::string> expect = {"example1",     "example2_dp",   "example2_cp",
                                             "example4",     "example5",      "example7_dc",
                                             "example7_ramp", "example8_square_ortho"};
    auto names = preset_names();
    EXPECT_EQ(names.size(), 8u);
    for (const auto& n : expect) {
        EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
        ExperimentConfig c = preset(n);
        EXPECT_EQ(c.name(), n);
        ExperimentConfig again = ExperimentConfig::from_json(Json::parse(preset_json(n).dump()));
        EXPECT_EQ(again.doc, c.doc);
        EXPECT_NO_THROW(preset(n, true));
    }
    std::string plain = list_presets(true);
    EXPECT_EQ(std::count(plain.begin(), plain.end(), '\n'), 8);
    EXPECT_THROW(preset("no_such_preset"), ConfigError);
}

TEST(Presets, FullScaleOverrides)
{
    ExperimentConfig desk = preset("example1");
    ExperimentConfig full = preset("example1", true);
    EXPECT_EQ(desk.doc["N"], 120);
    EXPECT_EQ(full.doc["N"], 500);
    EXPECT_EQ(full.doc["basis"]["n_modes"], 500);
    EXPECT_EQ(full.doc["slope_window"][0], 100);
    EXPECT_EQ(full.doc["mesh"], desk.doc["mesh"]);
}

TEST(Config, RejectsMalformedDocuments)
{
    auto bad = [](auto mutate) {
        Json j = small_config();
        mutate(j);
        return j;
    };
    EXPECT_NO_THROW(ExperimentConfig::from_json(small_config()));
    EXPECT_THROW(ExperimentConfig::from_json(bad([](Json& j) { j["colour"] = "red"; })), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json(bad([](Json& j) { j["basis"]["modes"] = 3; })), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json(bad([](Json& j) { j["schedule"] = {1, 5, 5, 10}; })), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json(bad([](Json& j) { j["schedule"] = {1, 5, 30}; })), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json(bad([](Json& j) { j["particular"]["recipe"] = "magic"; })),
                 ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json(bad([](Json& j) { j["N"] = 21; })), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json(bad([](Json& j) { j["principles"] = {"XX"}; })), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json(bad([](Json& j) { j["material"]["nu"] = 0.6; })), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json(bad([](Json& j) { j["domain"]["rb"] = 0.05; })), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json(bad([](Json& j) {
                     j["checks"].push_back({{"type", "slope"}, {"principle", "PT_body"}, {"expected", -1.0}, {"tol", 1.0}});
                 })),
                 ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json(bad([](Json& j) { j.erase("domain"); })), ConfigError);
}

TEST(Config, ParseDomain)
{
    Domain r = parse_domain("rectangle:1x1.01");
    ASSERT_TRUE(std::holds_alternative<Rectangle>(r));
    EXPECT_EQ(std::get<Rectangle>(r).Ly, 1.01);
    Domain a = parse_domain("annulus:0.1,0.3");
    ASSERT_TRUE(std::holds_alternative<Annulus>(a));
    EXPECT_EQ(std::get<Annulus>(a).rb, 0.3);
    EXPECT_THROW(parse_domain("disk:1"), ConfigError);
    EXPECT_THROW(parse_domain("annulus:0.3,0.1"), ConfigError);
}

TEST(RunExperiment, WritesDeterministicOutputsAndUsesCache)
{
    fs::path cache = fresh_dir("cache");
    ::setenv("SB_CACHE_DIR", cache.c_str(), 1);
    ExperimentConfig cfg = ExperimentConfig::from_json(small_config());
    fs::path out1 = fresh_dir("run1"), out2 = fresh_dir("run2");
    ExperimentReport rep = run_experiment(cfg, out1.string());
    EXPECT_TRUE(rep.pass());
    ASSERT_EQ(rep.results.size(), 2u);
    ASSERT_TRUE(rep.results[0].slope.has_value());
    EXPECT_LT(*rep.results[0].slope, -1.0);

    int cached = 0;
    for (const auto& e : fs::directory_iterator(cache)) cached += e.path().extension() == ".sbb";
    EXPECT_EQ(cached, 1);

    for (const char* f : {"convergence.csv", "convergence_SE.csv", "sigma_p.csv", "sigma_N.csv", "sigma_h.csv",
                          "sigma_N_SE.csv", "sigma_h_SE.csv", "report.json"})
        EXPECT_TRUE(fs::exists(out1 / f)) << f;
    const std::string conv = read_file((out1 / "convergence.csv").string());
    EXPECT_EQ(conv.rfind("N,a_N,objective,energy,E_N\n", 0), 0u);
    EXPECT_EQ(std::count(conv.begin(), conv.end(), '\n'), 22);
    Json report = Json::parse(read_file((out1 / "report.json").string()));
    EXPECT_EQ(report["name"], "small_hole");
    EXPECT_EQ(report["pass"], true);

    run_experiment(cfg, out2.string());
    for (const char* f : {"convergence.csv", "sigma_N.csv", "report.json"})
        EXPECT_EQ(read_file((out1 / f).string()), read_file((out2 / f).string())) << f;
    ::unsetenv("SB_CACHE_DIR");
}

TEST(RunExperiment, FailingCheckIsReportedNotThrown)
{
    Json j = small_config();
    j["checks"] = {{{"type", "slope"}, {"principle", "SE"}, {"expected", 3.0}, {"tol", 0.1}}};
    ExperimentReport rep = run_experiment(ExperimentConfig::from_json(j));
    ASSERT_EQ(rep.checks.size(), 1u);
    EXPECT_FALSE(rep.checks[0].pass);
    EXPECT_FALSE(rep.pass());
}

TEST(OracleCsv, HasProvenanceHeader)
{
    std::string csv = oracle_csv(ExperimentConfig::from_json(small_config()));
    EXPECT_EQ(csv.rfind("#", 0), 0u);
    EXPECT_NE(csv.find("analytic"), std::string::npos);
}
