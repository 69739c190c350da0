#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace sb {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Rectangle {
    double Lx = 1.0;
    double Ly = 1.0;
};

struct Annulus {
    double ra = 0.1;
    double rb = 0.3;
};

using Domain = std::variant<Rectangle, Annulus>;

void validate_domain(const Domain& d);
std::string describe(const Domain& d);

/// Line x = value (axis 'x') or y = value (axis 'y') that must coincide with element edges.
struct FeatureLine {
    char axis = 'x';
    double value = 0.0;
};

struct BoundaryEdge {
    int n1 = 0;
    int n2 = 0;
    std::string tag;
};

enum class MeshKind { Rectangle, Radial };

/// \brief Structured mesh: Q2 quadrilaterals on a rectangle or quadratic segments on [r_a, r_b].
///
/// Fields are sampled on the tensor Gauss grid built from xlines/ylines (rectangle) or on the
/// composite radial rule (radial grid). Quadrature points are ordered x fastest.
class Mesh {
public:
    MeshKind kind = MeshKind::Rectangle;
    Domain domain;
    std::vector<Point2> nodes;
    std::vector<std::vector<int>> elements;
    std::vector<BoundaryEdge> boundary;
    std::vector<FeatureLine> features;
    std::vector<double> xlines;  // element edges along x, or along r for radial grids
    std::vector<double> ylines;
    int quad_order = 3;

    // quadrature grid
    std::vector<double> qx, wx, qy, wy;

    std::size_t nqx() const { return qx.size(); }
    std::size_t nqy() const { return kind == MeshKind::Rectangle ? qy.size() : 1; }
    std::size_t num_qp() const { return nqx() * nqy(); }
    Point2 qp(std::size_t i) const;
    /// Area weight of quadrature point i; for radial grids this is w_i * r_i (per unit angle).
    double qweight(std::size_t i) const;

    bool has_line(char axis, double value, double tol = 1e-12) const;
    std::string hash() const;
    double measure() const;  // Lx*Ly, or integral of r dr for radial grids

    void build_quadrature();
};

using MeshPtr = std::shared_ptr<const Mesh>;

MeshPtr build_rectangle_mesh(const Domain& domain, int nx, int ny,
                             const std::vector<FeatureLine>& feature_lines = {}, int quad_order = 3);
MeshPtr build_radial_grid(const Domain& domain, int nr, int quad_order = 3);

/// Same geometry with a different per-element Gauss order.
MeshPtr with_quadrature(const Mesh& mesh, int quad_order);
/// Uniform refinement by an integer factor (feature lines are preserved).
MeshPtr refine(const Mesh& mesh, int factor, int quad_order);

std::string mesh_to_string(const Mesh& mesh);
MeshPtr mesh_from_string(const std::string& text);
void save_mesh(const Mesh& mesh, const std::string& path);
MeshPtr load_mesh(const std::string& path);

}  // namespace sb
