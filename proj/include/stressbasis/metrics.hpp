#pragma once

#include "stressbasis/fields.hpp"
#include "stressbasis/material.hpp"

#include <array>
#include <vector>

namespace sb {

/// E_N = ||true - approx||_E / ||true||_E.
double approximation_error(const SymTensorField2& sigma_true, const SymTensorField2& sigma_N, const Material& m);

/// Integral of the squared planar trace.
double trace_energy(const SymTensorField2& s);

/// \brief Closed polyline around one hole with a reference point X.
struct CesaroLoop {
    std::vector<Point2> points;  // vertices; the last vertex connects back to the first
    Point2 X;
};
CesaroLoop circle_loop(double radius, int segments, Point2 X = {0.0, 0.0});
/// Throws unless the loop is positively oriented, lies inside the annulus and winds once around the hole.
void validate_loop(const CesaroLoop& loop, const Annulus& ann);

/// (F_1, F_2) = loop integral of U_ij dx_j with U_ij = e_ij + (X_l - x_l)(e_ij,l - e_lj,i).
std::array<double, 2> cesaro_diagnostic(const SymTensorField2& s, const CesaroLoop& loop, const Material& m,
                                        int gauss_per_segment = 4);

}  // namespace sb
