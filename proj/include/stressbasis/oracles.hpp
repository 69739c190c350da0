#pragma once

#include "stressbasis/fields.hpp"
#include "stressbasis/loading.hpp"
#include "stressbasis/material.hpp"

#include <limits>
#include <optional>
#include <string>

namespace sb {

/// \brief Reference stress given by a pointwise evaluator; sample it onto any compatible mesh.
struct OracleSolution {
    SourcePtr source;
    std::optional<AzimuthalTag> tag;
    std::string method;      // analytic | ode-bvp | displacement-fem
    std::string resolution;  // free-form metadata
    double energy = std::numeric_limits<double>::quiet_NaN();  // strain energy on the oracle's own grid, if known

    SymTensorField2 on(const MeshPtr& mesh, bool with_gradient = true) const;
};

struct LameCoefficients {
    double A = 0.0;
    double B = 0.0;
};
/// sigma_rr = A + B / r^2, sigma_tt = A - B / r^2 with sigma_rr(r_a) = -p, sigma_rr(r_b) = 0.
LameCoefficients lame_coefficients(double ra, double rb, double p);
OracleSolution lame_oracle(double ra, double rb, double p, const Material& m);

/// m = 1 (cos family) stress with sigma_rr = 1 at r_a, r_a / r_b at r_b, zero shear traction and the
/// hole's compatibility condition, by shooting on the radial equations.
struct M1OracleReport {
    int rank = 0;                 // rank of the 5 x 4 boundary-condition matrix
    double residual = 0.0;        // least-squares residual of all five conditions
    double dropped_residual = 0.0;  // outer shear traction of the solution without that condition
};
OracleSolution annulus_m1_oracle(double ra, double rb, double nu, double Y, M1OracleReport* report = nullptr);

struct FemOptions {
    int refine = 2;      // element refinement relative to the input mesh
    int quad_order = 4;  // Gauss points per direction for stiffness and loads
};
/// Plane-strain Q2 displacement solve on a refined copy of a rectangle mesh. Rigid modes are removed
/// by fixing both components at the bottom-left corner and the normal component at the bottom-right.
OracleSolution displacement_fem_oracle(const Mesh& mesh, const LoadingSpec& loading, const Material& m,
                                       const FemOptions& opt = {});

}  // namespace sb
