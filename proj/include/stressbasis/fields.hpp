#pragma once

#include "stressbasis/mesh.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sb {

/// Symmetric 2x2 tensor: (xx, yy, xy) on rectangles, (rr, tt, rt) radial profiles on annuli.
struct Sym2 {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    Sym2& operator+=(const Sym2& o) { a += o.a; b += o.b; c += o.c; return *this; }
    Sym2& operator-=(const Sym2& o) { a -= o.a; b -= o.b; c -= o.c; return *this; }
    Sym2& operator*=(double s) { a *= s; b *= s; c *= s; return *this; }
    double trace() const { return a + b; }
};

inline Sym2 operator+(Sym2 x, const Sym2& y) { return x += y; }
inline Sym2 operator-(Sym2 x, const Sym2& y) { return x -= y; }
inline Sym2 operator*(double s, Sym2 x) { return x *= s; }
/// Full contraction A_ij B_ij (shear counted twice).
inline double contract(const Sym2& x, const Sym2& y) { return x.a * y.a + x.b * y.b + 2.0 * x.c * y.c; }

enum class Parity { Cos, Sin };

/// Angular dependence of a radial field. Cos family: (rr, tt) ~ cos(m t), rt ~ sin(m t).
/// Sin family: (rr, tt) ~ sin(m t), rt ~ -cos(m t). For m = 0 all components are constant.
struct AzimuthalTag {
    int m = 0;
    Parity parity = Parity::Cos;
    bool operator==(const AzimuthalTag&) const = default;
};

double theta_weight(const AzimuthalTag& tag);
std::string describe(const AzimuthalTag& tag);

/// Value and first derivatives: (d/dx, d/dy) on rectangles, (d/dr, unused) for radial profiles.
struct Jet {
    Sym2 v;
    Sym2 d1;
    Sym2 d2;
};

/// \brief Pointwise evaluator behind a field; lets boundary checks, nodal dumps and loop integrals
/// sample off the quadrature grid.
struct TensorSource {
    std::function<Jet(double, double)> fn;
    std::vector<FeatureLine> jumps;  // lines across which the field may be discontinuous
};
using SourcePtr = std::shared_ptr<const TensorSource>;

class SymTensorField2 {
public:
    SymTensorField2() = default;
    SymTensorField2(MeshPtr mesh, std::vector<Sym2> values, std::optional<AzimuthalTag> tag,
                    std::vector<Sym2> d1 = {}, std::vector<Sym2> d2 = {}, SourcePtr source = nullptr);

    const MeshPtr& mesh() const { return mesh_; }
    const std::vector<Sym2>& values() const { return values_; }
    const std::vector<Sym2>& d1() const { return d1_; }
    const std::vector<Sym2>& d2() const { return d2_; }
    const std::optional<AzimuthalTag>& tag() const { return tag_; }
    const SourcePtr& source() const { return source_; }
    bool has_gradient() const { return !d1_.empty(); }
    std::size_t size() const { return values_.size(); }

    Jet evaluate(double x, double y) const;

    SymTensorField2 scaled(double s) const;
    /// this + s * other, on the same mesh and tag.
    SymTensorField2 axpy(double s, const SymTensorField2& other) const;
    SymTensorField2 without_source() const;

private:
    MeshPtr mesh_;
    std::vector<Sym2> values_, d1_, d2_;
    std::optional<AzimuthalTag> tag_;
    SourcePtr source_;
};

inline SymTensorField2 operator+(const SymTensorField2& x, const SymTensorField2& y) { return x.axpy(1.0, y); }
inline SymTensorField2 operator-(const SymTensorField2& x, const SymTensorField2& y) { return x.axpy(-1.0, y); }

class ScalarField {
public:
    ScalarField() = default;
    ScalarField(MeshPtr mesh, std::vector<double> values, std::optional<AzimuthalTag> tag = std::nullopt);
    const MeshPtr& mesh() const { return mesh_; }
    const std::vector<double>& values() const { return values_; }
    const std::optional<AzimuthalTag>& tag() const { return tag_; }

private:
    MeshPtr mesh_;
    std::vector<double> values_;
    std::optional<AzimuthalTag> tag_;
};

SymTensorField2 sample(const SourcePtr& src, const MeshPtr& mesh, std::optional<AzimuthalTag> tag,
                       bool with_gradient = true);
SymTensorField2 constant_field(const MeshPtr& mesh, const Sym2& value,
                               std::optional<AzimuthalTag> tag = std::nullopt);
ScalarField sample_scalar(const std::function<double(double, double)>& f, const MeshPtr& mesh,
                          std::optional<AzimuthalTag> tag = std::nullopt);

double l2_inner_tensor(const SymTensorField2& A, const SymTensorField2& B);
double l2_inner_scalar(const ScalarField& f, const ScalarField& g);
double l2_norm(const SymTensorField2& A);
ScalarField planar_trace(const SymTensorField2& A);

/// Throws unless both fields live on the same mesh with the same wavenumber tag.
void require_compatible(const SymTensorField2& A, const SymTensorField2& B);

/// Cartesian value and x/y derivatives of a tagged radial field at (r, theta).
Jet polar_to_cartesian(const Jet& profile, const AzimuthalTag& tag, double r, double theta);

/// CSV dump at mesh nodes: `x,y,sxx,syy,sxy` or `r,m,srr,stt,srt`.
std::string field_csv(const SymTensorField2& A, const std::string& header_comment = "");

}  // namespace sb
