#pragma once

#include "stressbasis/fields.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sb {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Traction on one tagged boundary. Rectangles: Cartesian traction at a boundary point.
/// Radial loadings: amplitudes (t_r, t_theta) of the tag's angular factors at radius x.
struct BoundaryLoad {
    std::string tag;
    std::function<Vec2(double, double)> traction;
    std::string description;
};

/// Body force b = -grad V.
struct BodyForce {
    std::function<double(double, double)> potential;
    std::function<Vec2(double, double)> force;
    std::vector<FeatureLine> jumps;
    std::string description;
};

struct LoadingSpec {
    std::vector<BoundaryLoad> tractions;
    std::optional<BodyForce> body;
    std::optional<AzimuthalTag> tag;
    std::string description;

    Vec2 traction(const std::string& boundary_tag, double x, double y) const;
};

struct Resultant {
    std::string tag;
    double fx = 0.0;
    double fy = 0.0;
    double moment = 0.0;
};

struct Resultants {
    std::vector<Resultant> boundaries;  // per tagged boundary (on an annulus "inner" is the hole)
    Resultant body;
    Resultant total;
};

Resultants compute_resultants(const LoadingSpec& loading, const Mesh& mesh);
/// Throws when total force or moment exceeds tol.
void check_self_equilibrated(const LoadingSpec& loading, const Mesh& mesh, double tol = 1e-10);

struct EquilibriumResidual {
    double interior_norm = 0.0;       // L2 norm of div A + b over element interiors
    double boundary_mismatch = 0.0;   // max |A n - tau| over boundary quadrature points
    double field_norm = 0.0;          // L2 norm of A, for relative tolerances
};

EquilibriumResidual equilibrium_residual(const SymTensorField2& A, const LoadingSpec& loading);

/// Boundary quadrature points (x, y, outward normal) per tag, `order` Gauss points per edge.
struct BoundaryPoint {
    std::string tag;
    Point2 p;
    Vec2 n;
    double w = 0.0;
};
std::vector<BoundaryPoint> boundary_points(const Mesh& mesh, int order);

}  // namespace sb
