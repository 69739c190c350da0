#pragma once

#include "stressbasis/basis.hpp"
#include "stressbasis/material.hpp"

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <vector>

namespace sb {

enum class Principle { SE, PT, PTBody };
std::string to_string(Principle p);
Principle principle_from_string(const std::string& s);

/// Energy Gram G(i, j) = <C^-1 F_i, F_j> over fields sharing one mesh; pairs with different
/// wavenumber tags are orthogonal and left at zero.
Eigen::MatrixXd energy_gram(const Material& m, const std::vector<const SymTensorField2*>& fields);

struct SESystem {
    Eigen::MatrixXd M;
    Eigen::VectorXd f;
    double energy_p = 0.0;  // strain energy of sigma_p
};
SESystem assemble_se_system(const BasisSet& basis, const SymTensorField2& sigma_p, const Material& m, int N);

/// Row n describes the approximation with the first n modes (n = 0 is sigma_p).
struct StepDiagnostics {
    int n = 0;
    double a_n = 0.0;        // last coefficient of the n-mode solve (0 for n = 0)
    double objective = 0.0;  // functional the principle minimizes
    double energy = std::numeric_limits<double>::quiet_NaN();
    double trace = 0.0;
    double error = std::numeric_limits<double>::quiet_NaN();  // E_n when a reference is attached
};

struct Approximation {
    Principle principle = Principle::SE;
    Eigen::VectorXd coeffs;  // final coefficients, length N
    SymTensorField2 sigma_p;
    SymTensorField2 sigma_N;
    std::vector<StepDiagnostics> steps;
    double condition = std::numeric_limits<double>::quiet_NaN();  // SE only: cond_2(M)
    std::vector<Eigen::VectorXd> nested;                          // SE only: solution for each n

    int N() const { return static_cast<int>(coeffs.size()); }
    Eigen::VectorXd coefficients(int n) const;
    SymTensorField2 sigma_h() const { return sigma_N - sigma_p; }
};

Approximation solve_strain_energy(const SymTensorField2& sigma_p, const BasisSet& basis, const Material& m, int N,
                                  const SymTensorField2* reference = nullptr);
/// Material-blind: a_i = -<trace sigma_p, trace phi_i>.
Approximation solve_planar_trace(const SymTensorField2& sigma_p, const BasisSet& basis, int N);
/// a_i = -<trace sigma_p - V / (1 - nu), trace phi_i>.
Approximation solve_planar_trace_body(const SymTensorField2& sigma_p, const BasisSet& basis, const ScalarField& V,
                                      double nu, int N);

/// Fills energy (and E_n against the reference, if given) for every step of an approximation.
void attach_energy_diagnostics(Approximation& approx, const BasisSet& basis, const Material& m,
                               const SymTensorField2* reference = nullptr);

}  // namespace sb
