#include "stressbasis/loading.hpp"
#include "stressbasis/mesh.hpp"
#include "stressbasis/particular.hpp"
#include "stressbasis/util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace sb;

TEST(RectangleMesh, FeatureLinesOnCoarseGrid)
{
    auto m = build_rectangle_mesh(Rectangle{1.0, 1.0}, 4, 4, {{'x', 0.25}, {'x', 0.75}});
    EXPECT_TRUE(m->has_line('x', 0.25));
    EXPECT_TRUE(m->has_line('x', 0.75));
    EXPECT_EQ(m->nodes.size(), 81u);
    EXPECT_EQ(m->elements.size(), 16u);
}

TEST(RectangleMesh, NodeAndElementCounts)
{
    auto m = build_rectangle_mesh(Rectangle{1.0, 1.01}, 32, 32, {});
    EXPECT_EQ(m->nodes.size(), 65u * 65u);
    EXPECT_EQ(m->elements.size(), 1024u);
    EXPECT_EQ(m->boundary.size(), 128u);
}

TEST(RectangleMesh, RejectsDegenerateAndUnrepresentableRequests)
{
    EXPECT_THROW(build_rectangle_mesh(Rectangle{1.0, 1.0}, 1, 4, {}), std::invalid_argument);
    EXPECT_THROW(build_rectangle_mesh(Rectangle{1.0, 1.0}, 5, 5, {{'x', 0.25}}), std::invalid_argument);
    EXPECT_THROW(build_rectangle_mesh(Rectangle{1.0, 1.0}, 8, 8, {{'x', 1.5}}), std::invalid_argument);
    EXPECT_THROW(build_rectangle_mesh(Rectangle{-1.0, 1.0}, 8, 8, {}), std::invalid_argument);
    EXPECT_THROW(build_rectangle_mesh(Annulus{0.1, 0.3}, 8, 8, {}), std::invalid_argument);
}

TEST(RectangleMesh, QuadratureMeasureMatchesArea)
{
    auto m = build_rectangle_mesh(Rectangle{1.0, 1.01}, 12, 10, {}, 3);
    double s = 0.0;
    for (std::size_t i = 0; i < m->num_qp(); ++i) s += m->qweight(i);
    EXPECT_NEAR(s, 1.01, 1e-12);
    EXPECT_NEAR(m->measure(), 1.01, 1e-12);
}

TEST(RadialGrid, NodesSpacingAndErrors)
{
    auto m = build_radial_grid(Annulus{0.1, 0.3}, 64);
    EXPECT_EQ(m->nodes.size(), 129u);
    for (std::size_t i = 1; i < m->xlines.size(); ++i)
        EXPECT_NEAR(m->xlines[i] - m->xlines[i - 1], 0.2 / 64, 1e-15);
    EXPECT_THROW(build_radial_grid(Annulus{0.1, 0.3}, 3), std::invalid_argument);
    EXPECT_THROW(build_radial_grid(Rectangle{1.0, 1.0}, 8), std::invalid_argument);
    EXPECT_THROW(build_radial_grid(Annulus{0.3, 0.1}, 8), std::invalid_argument);
    double s = 0.0;
    for (std::size_t i = 0; i < m->num_qp(); ++i) s += m->qweight(i);
    EXPECT_NEAR(s, (0.09 - 0.01) / 2.0, 1e-14);
}

TEST(MeshFile, RoundTripRectangleAndRadial)
{
    const auto dir = std::filesystem::temp_directory_path() / "sb_mesh_test";
    std::filesystem::create_directories(dir);
    for (MeshPtr m : {build_rectangle_mesh(Rectangle{1.0, 1.01}, 6, 4, {}, 3),
                      build_rectangle_mesh(Rectangle{1.0, 1.0}, 8, 8, {{'x', 0.25}, {'y', 0.5}}, 4),
                      build_radial_grid(Annulus{0.1, 0.3}, 10, 5)}) {
        const std::string path = (dir / "m.txt").string();
        save_mesh(*m, path);
        EXPECT_EQ(read_file(path).rfind("SBMESH 1\n", 0), 0u);
        auto back = load_mesh(path);
        ASSERT_EQ(back->nodes.size(), m->nodes.size());
        for (std::size_t i = 0; i < m->nodes.size(); ++i) {
            EXPECT_EQ(back->nodes[i].x, m->nodes[i].x);
            EXPECT_EQ(back->nodes[i].y, m->nodes[i].y);
        }
        EXPECT_EQ(back->elements, m->elements);
        EXPECT_EQ(back->hash(), m->hash());
        EXPECT_EQ(mesh_to_string(*back), mesh_to_string(*m));
    }
}

TEST(MeshFile, MissingBoundaryTagNamesEdge)
{
    auto m = build_rectangle_mesh(Rectangle{1.0, 1.0}, 4, 4, {}, 3);
    std::string text = mesh_to_string(*m);
    // drop the last boundary edge line
    auto last = text.rfind("edge ");
    std::string cut = text.substr(0, last);
    auto bpos = cut.find("boundary ");
    auto eol = cut.find('\n', bpos);
    cut.replace(bpos, eol - bpos, "boundary " + std::to_string(m->boundary.size() - 1));
    try {
        mesh_from_string(cut);
        FAIL() << "expected an error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("untagged boundary edge"), std::string::npos) << e.what();
    }
}

TEST(MeshFile, EmptyAndMalformedRejected)
{
    EXPECT_THROW(mesh_from_string(""), std::runtime_error);
    EXPECT_THROW(mesh_from_string("SBMESH 2\n"), std::runtime_error);
    EXPECT_THROW(mesh_from_string("SBMESH 1\nnodes 2\n0 0\n"), std::runtime_error);
}

TEST(Loading, SelfEquilibriumAndHoleResultants)
{
    auto m = build_rectangle_mesh(Rectangle{1.0, 1.0}, 8, 8, {{'x', 0.25}, {'x', 0.75}}, 3);
    LoadingSpec bad;
    bad.tractions.push_back({"top", [](double, double) { return Vec2{0.0, -1.0}; }, "top only"});
    EXPECT_THROW(check_self_equilibrated(bad, *m), std::invalid_argument);
    auto band = band_pressure_particular(m, 1.0, BandProfile::Quartic);
    EXPECT_NO_THROW(check_self_equilibrated(band.loading, *m));
    Resultants r = compute_resultants(band.loading, *m);
    for (const auto& b : r.boundaries)
        if (b.tag == "top") {
            EXPECT_NEAR(b.fy, -4.0 / 15.0, 1e-12);
        }

    auto g = build_radial_grid(Annulus{0.1, 0.3}, 16, 4);
    auto m1 = annulus_m1_particular(g);
    Resultants rr = compute_resultants(m1.loading, *g);
    for (const auto& b : rr.boundaries) {
        if (b.tag == "inner") {
            EXPECT_NEAR(b.fx, -M_PI * 0.1, 1e-12);
        }
        if (b.tag == "outer") {
            EXPECT_NEAR(b.fx, M_PI * 0.1, 1e-12);
        }
    }
    EXPECT_NEAR(rr.total.fx, 0.0, 1e-12);
}
