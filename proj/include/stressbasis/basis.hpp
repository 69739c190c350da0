#pragma once

#include "stressbasis/fields.hpp"
#include "stressbasis/spectral.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sb {

/// \brief Maps coefficient vectors to self-equilibrated, traction-free stress fields on a mesh.
class ModeGenerator : public std::enable_shared_from_this<ModeGenerator> {
public:
    virtual ~ModeGenerator() = default;
    virtual std::string id() const = 0;  // reconstructs the generator with generator_from_id
    virtual Eigen::Index dim() const = 0;
    virtual std::optional<AzimuthalTag> tag() const = 0;
    virtual const MeshPtr& mesh() const = 0;
    virtual SymTensorField2 sample(const Eigen::VectorXd& c, bool with_gradient) const = 0;
    virtual Jet evaluate(const Eigen::VectorXd& c, double x, double y) const = 0;
    /// Coefficient-space L2 Gram and H1-seminorm Gram, integrated with the mesh rule.
    virtual const Eigen::MatrixXd& mass() const = 0;
    virtual const Eigen::MatrixXd& stiffness() const = 0;

    SourcePtr source(const Eigen::VectorXd& c) const;
};
using GeneratorPtr = std::shared_ptr<const ModeGenerator>;

/// Airy potential psi = sum C_ij f_i(x) g_j(y) with clamped families; sigma = (psi_yy, psi_xx, -psi_xy).
GeneratorPtr make_rectangle_generator(const MeshPtr& mesh, std::shared_ptr<Family1D> fx, std::shared_ptr<Family1D> fy);
/// Radial profiles for one wavenumber: m = 0, 1 from a Dirichlet potential h, m >= 2 from a clamped Airy profile.
GeneratorPtr make_radial_generator(const MeshPtr& mesh, const AzimuthalTag& tag, int n);
GeneratorPtr generator_from_id(const MeshPtr& mesh, const std::string& id);

struct BasisMode {
    SymTensorField2 field;  // values at quadrature points, unit L2 norm
    double lambda = 0.0;
    GeneratorPtr generator;
    Eigen::VectorXd coeffs;
};

struct Provenance {
    std::string backend;
    std::string mesh_hash;
    std::string params;
    double degenerate_threshold = 1e-6;
    std::string hash() const;
};

struct BasisSet {
    MeshPtr mesh;
    std::vector<BasisMode> modes;
    Eigen::MatrixXd gram_l2;
    Eigen::MatrixXd trace_gram;
    Provenance provenance;

    std::size_t size() const { return modes.size(); }
    /// Prefix of the first n modes.
    BasisSet truncated(std::size_t n) const;
    /// sum_j a_j phi_j for j < a.size(), as a field with gradients and evaluator.
    SymTensorField2 combination(const Eigen::VectorXd& a) const;
    void compute_grams();
};

struct EigenSolveConfig {
    int n_modes = 20;
    int spectral_size = 0;  // functions per direction (rectangle) or per wavenumber (annulus); 0 = automatic
    double degenerate_threshold = 1e-6;
    bool keep_sin_family = true;  // annulus only
};

int default_rectangle_spectral_size(int n_modes);
int default_radial_spectral_size(int n_modes);
/// Smallest Gauss order per element that resolves a spectral family of size n on nel elements.
/// Radial families need about twice the sampling density of rectangle families.
int recommended_quadrature_order(int n, int nel, MeshKind kind = MeshKind::Rectangle);

BasisSet solve_basis_rectangle(const MeshPtr& mesh, const EigenSolveConfig& cfg);
BasisSet solve_basis_annulus(const MeshPtr& mesh, const std::vector<int>& wavenumbers, const EigenSolveConfig& cfg);
BasisSet orthonormalize(const BasisSet& basis, double degenerate_threshold = 1e-6);
/// Products of clamped polynomials taken in shells max(i, j) = s, L2-orthonormalized; near-dependent
/// directions are dropped and counted in the provenance.
BasisSet airy_bump_basis(const MeshPtr& mesh, int n);

struct BasisReport {
    double max_l2_offdiag = 0.0;
    double max_l2_diag_error = 0.0;
    double max_h1_offdiag_rel = 0.0;
    double max_rayleigh_rel = 0.0;  // eigen backends only
    double max_equilibrium = 0.0;   // relative to the mode norm
    double max_traction = 0.0;      // relative to the mode sup norm
    double max_trace_gram_diff = 0.0;
    bool pass_l2 = false, pass_h1 = false, pass_equilibrium = false, pass_traction = false;
    bool pass() const { return pass_l2 && pass_h1 && pass_equilibrium && pass_traction; }
    std::string summary() const;
};

struct BasisTolerances {
    double l2_offdiag = 1e-8;
    double l2_diag = 1e-10;
    double h1_offdiag = 1e-6;
    double equilibrium = 1e-8;
    double traction = 1e-8;
};

BasisReport verify_basis(const BasisSet& basis, const BasisTolerances& tol = {});

/// Basis cache file (SBBASIS 1). With nodal = true the nodal components of every mode are appended.
std::string basis_to_string(const BasisSet& basis, bool nodal = false);
BasisSet basis_from_string(const std::string& text, const MeshPtr& mesh = nullptr);
void save_basis(const BasisSet& basis, const std::string& path, bool nodal = false);
BasisSet load_basis(const std::string& path, const MeshPtr& mesh = nullptr);

}  // namespace sb
