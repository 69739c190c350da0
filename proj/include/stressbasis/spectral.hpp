#pragma once

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace sb {

/// Legendre polynomials P_0..P_n and derivatives up to order 3 at t in [-1, 1].
/// out[d][k] = d-th derivative of P_k.
void legendre_derivatives(double t, int n, std::array<std::vector<double>, 4>& out);

/// \brief One-dimensional function family on [a, b] with derivatives up to order 3.
class Family1D {
public:
    virtual ~Family1D() = default;
    virtual int size() const = 0;
    virtual std::string id() const = 0;  // e.g. "clamped 24 0 1"
    /// d-th derivative (d = 0..3) of all functions at x; out[d] has size() entries.
    virtual void eval(double x, std::array<std::vector<double>, 4>& out) const = 0;

    double a = 0.0, b = 1.0;

    /// Evaluation matrices D[d] (points x functions).
    std::array<Eigen::MatrixXd, 4> matrices(const std::vector<double>& x) const;
};

/// Legendre combinations vanishing at both ends ("dirichlet": P_k - P_{k+2}) or vanishing with
/// their first derivative ("clamped").
class ShenFamily : public Family1D {
public:
    enum class Kind { Dirichlet, Clamped };
    ShenFamily(Kind kind, int n, double a, double b);
    int size() const override { return n_; }
    std::string id() const override;
    void eval(double x, std::array<std::vector<double>, 4>& out) const override;
    Kind kind() const { return kind_; }

private:
    Kind kind_;
    int n_;
};

std::shared_ptr<Family1D> family_from_id(const std::string& id);

/// Generalized symmetric eigenproblem S c = lambda M c with M >= 0 possibly ill-conditioned.
/// Returns the lowest `count` pairs; eigenvectors are M-orthonormal.
struct GenEigResult {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    int dropped = 0;              // directions removed as numerically null in M
    double mass_condition = 0.0;  // condition estimate of the scaled mass matrix
};
GenEigResult generalized_eigen(const Eigen::MatrixXd& S, const Eigen::MatrixXd& M, int count);

}  // namespace sb
