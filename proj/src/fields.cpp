#include "stressbasis/fields.hpp"

#include "stressbasis/util.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sb {

double theta_weight(const AzimuthalTag& tag)
{
    return tag.m == 0 ? 2.0 * std::numbers::pi : std::numbers::pi;
}

std::string describe(const AzimuthalTag& tag)
{
    return "m=" + std::to_string(tag.m) + (tag.parity == Parity::Cos ? " cos" : " sin");
}

namespace {

void check_finite(const std::vector<Sym2>& v)
{
    for (const auto& s : v)
        if (!std::isfinite(s.a) || !std::isfinite(s.b) || !std::isfinite(s.c))
            throw std::domain_error("field contains non-finite values");
}

void check_tag(const MeshPtr& mesh, const std::optional<AzimuthalTag>& tag)
{
    if (!mesh) throw std::invalid_argument("field requires a mesh");
    bool radial = mesh->kind == MeshKind::Radial;
    if (radial != tag.has_value())
        throw std::invalid_argument("wavenumber tag must be present exactly when the mesh is radial");
    if (tag && (tag->m < 0 || (tag->m == 0 && tag->parity == Parity::Sin)))
        throw std::invalid_argument("invalid wavenumber tag");
}

}  // namespace

SymTensorField2::SymTensorField2(MeshPtr mesh, std::vector<Sym2> values, std::optional<AzimuthalTag> tag,
                                 std::vector<Sym2> d1, std::vector<Sym2> d2, SourcePtr source)
    : mesh_(std::move(mesh)), values_(std::move(values)), d1_(std::move(d1)), d2_(std::move(d2)), tag_(tag),
      source_(std::move(source))
{
    check_tag(mesh_, tag_);
    if (values_.size() != mesh_->num_qp()) throw std::invalid_argument("field size does not match mesh");
    if (!d1_.empty() && (d1_.size() != values_.size() || d2_.size() != values_.size()))
        throw std::invalid_argument("gradient size does not match field");
    check_finite(values_);
}

Jet SymTensorField2::evaluate(double x, double y) const
{
    if (!source_) throw std::logic_error("field has no pointwise evaluator");
    return source_->fn(x, y);
}

SymTensorField2 SymTensorField2::scaled(double s) const
{
    auto scale = [s](std::vector<Sym2> v) {
        for (auto& e : v) e *= s;
        return v;
    };
    SourcePtr src;
    if (source_) {
        auto inner = source_;
        src = std::make_shared<TensorSource>(TensorSource{[inner, s](double x, double y) {
                                                              Jet j = inner->fn(x, y);
                                                              j.v *= s;
                                                              j.d1 *= s;
                                                              j.d2 *= s;
                                                              return j;
                                                          },
                                                          inner->jumps});
    }
    return SymTensorField2(mesh_, scale(values_), tag_, scale(d1_), scale(d2_), src);
}

SymTensorField2 SymTensorField2::axpy(double s, const SymTensorField2& o) const
{
    require_compatible(*this, o);
    std::vector<Sym2> v = values_;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += s * o.values_[i];
    std::vector<Sym2> g1, g2;
    if (has_gradient() && o.has_gradient()) {
        g1 = d1_;
        g2 = d2_;
        for (std::size_t i = 0; i < v.size(); ++i) {
            g1[i] += s * o.d1_[i];
            g2[i] += s * o.d2_[i];
        }
    }
    SourcePtr src;
    if (source_ && o.source_) {
        auto p = source_, q = o.source_;
        auto jumps = p->jumps;
        jumps.insert(jumps.end(), q->jumps.begin(), q->jumps.end());
        src = std::make_shared<TensorSource>(TensorSource{[p, q, s](double x, double y) {
                                                              Jet a = p->fn(x, y), b = q->fn(x, y);
                                                              a.v += s * b.v;
                                                              a.d1 += s * b.d1;
                                                              a.d2 += s * b.d2;
                                                              return a;
                                                          },
                                                          jumps});
    }
    return SymTensorField2(mesh_, std::move(v), tag_, std::move(g1), std::move(g2), src);
}

SymTensorField2 SymTensorField2::without_source() const
{
    return SymTensorField2(mesh_, values_, tag_, d1_, d2_, nullptr);
}

ScalarField::ScalarField(MeshPtr mesh, std::vector<double> values, std::optional<AzimuthalTag> tag)
    : mesh_(std::move(mesh)), values_(std::move(values)), tag_(tag)
{
    check_tag(mesh_, tag_);
    if (values_.size() != mesh_->num_qp()) throw std::invalid_argument("scalar field size does not match mesh");
    for (double v : values_)
        if (!std::isfinite(v)) throw std::domain_error("scalar field contains non-finite values");
}

SymTensorField2 sample(const SourcePtr& src, const MeshPtr& mesh, std::optional<AzimuthalTag> tag,
                       bool with_gradient)
{
    for (const auto& j : src->jumps)
        if (!mesh->has_line(j.axis, j.value))
            throw std::invalid_argument("field discontinuity at " + std::string(1, j.axis) + "=" + fmt17(j.value) +
                                        " is not aligned with mesh lines");
    const std::size_t n = mesh->num_qp();
    std::vector<Sym2> v(n), g1, g2;
    if (with_gradient) {
        g1.resize(n);
        g2.resize(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        Point2 p = mesh->qp(i);
        Jet j = src->fn(p.x, p.y);
        v[i] = j.v;
        if (with_gradient) {
            g1[i] = j.d1;
            g2[i] = j.d2;
        }
    }
    return SymTensorField2(mesh, std::move(v), tag, std::move(g1), std::move(g2), src);
}

SymTensorField2 constant_field(const MeshPtr& mesh, const Sym2& value, std::optional<AzimuthalTag> tag)
{
    auto src = std::make_shared<TensorSource>(TensorSource{[value](double, double) { return Jet{value, {}, {}}; }, {}});
    return sample(src, mesh, tag, true);
}

ScalarField sample_scalar(const std::function<double(double, double)>& f, const MeshPtr& mesh,
                          std::optional<AzimuthalTag> tag)
{
    std::vector<double> v(mesh->num_qp());
    for (std::size_t i = 0; i < v.size(); ++i) {
        Point2 p = mesh->qp(i);
        v[i] = f(p.x, p.y);
    }
    return ScalarField(mesh, std::move(v), tag);
}

void require_compatible(const SymTensorField2& A, const SymTensorField2& B)
{
    if (A.mesh() != B.mesh()) throw std::invalid_argument("fields live on different meshes");
    if (A.tag() != B.tag()) throw std::invalid_argument("fields carry different wavenumber tags");
}

double l2_inner_tensor(const SymTensorField2& A, const SymTensorField2& B)
{
    require_compatible(A, B);
    const Mesh& m = *A.mesh();
    double s = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) s += m.qweight(i) * contract(A.values()[i], B.values()[i]);
    if (A.tag()) s *= theta_weight(*A.tag());
    return s;
}

double l2_inner_scalar(const ScalarField& f, const ScalarField& g)
{
    if (f.mesh() != g.mesh()) throw std::invalid_argument("scalar fields live on different meshes");
    if (f.tag() != g.tag()) throw std::invalid_argument("scalar fields carry different wavenumber tags");
    const Mesh& m = *f.mesh();
    double s = 0.0;
    for (std::size_t i = 0; i < f.values().size(); ++i) s += m.qweight(i) * f.values()[i] * g.values()[i];
    if (f.tag()) s *= theta_weight(*f.tag());
    return s;
}

double l2_norm(const SymTensorField2& A)
{
    return std::sqrt(l2_inner_tensor(A, A));
}

ScalarField planar_trace(const SymTensorField2& A)
{
    std::vector<double> t(A.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = A.values()[i].trace();
    return ScalarField(A.mesh(), std::move(t), A.tag());
}

Jet polar_to_cartesian(const Jet& profile, const AzimuthalTag& tag, double r, double theta)
{
    const double m = tag.m;
    double cm = 1.0, sm = 1.0;
    if (tag.m > 0) {
        if (tag.parity == Parity::Cos) {
            cm = std::cos(m * theta);
            sm = std::sin(m * theta);
        } else {
            cm = std::sin(m * theta);
            sm = -std::cos(m * theta);
        }
    }
    // d(cm)/dtheta = -m sm, d(sm)/dtheta = m cm (also valid at m = 0)
    Sym2 P{profile.v.a * cm, profile.v.b * cm, profile.v.c * sm};
    Sym2 Pr{profile.d1.a * cm, profile.d1.b * cm, profile.d1.c * sm};
    Sym2 Pt{-m * profile.v.a * sm, -m * profile.v.b * sm, m * profile.v.c * cm};

    const double C = std::cos(theta), S = std::sin(theta);
    const double CC = C * C, SS = S * S, CS = C * S, D = CC - SS;
    auto rot = [&](const Sym2& q) {
        return Sym2{q.a * CC + q.b * SS - 2.0 * q.c * CS, q.a * SS + q.b * CC + 2.0 * q.c * CS,
                    (q.a - q.b) * CS + q.c * D};
    };
    Sym2 val = rot(P);
    Sym2 dr = rot(Pr);
    Sym2 dt = rot(Pt);
    dt.a += -2.0 * P.a * CS + 2.0 * P.b * CS - 2.0 * P.c * D;
    dt.b += 2.0 * P.a * CS - 2.0 * P.b * CS + 2.0 * P.c * D;
    dt.c += (P.a - P.b) * D - 4.0 * P.c * CS;

    Jet out;
    out.v = val;
    out.d1 = C * dr - (S / r) * dt;
    out.d2 = S * dr + (C / r) * dt;
    return out;
}

std::string field_csv(const SymTensorField2& A, const std::string& header_comment)
{
    const Mesh& m = *A.mesh();
    std::ostringstream os;
    if (!header_comment.empty()) os << "# " << header_comment << "\n";
    if (m.kind == MeshKind::Radial) {
        os << "r,m,srr,stt,srt\n";
        for (const auto& p : m.nodes) {
            Sym2 v = A.evaluate(p.x, 0.0).v;
            os << fmt17(p.x) << "," << A.tag()->m << "," << fmt17(v.a) << "," << fmt17(v.b) << "," << fmt17(v.c)
               << "\n";
        }
    } else {
        os << "x,y,sxx,syy,sxy\n";
        for (const auto& p : m.nodes) {
            Sym2 v = A.evaluate(p.x, p.y).v;
            os << fmt17(p.x) << "," << fmt17(p.y) << "," << fmt17(v.a) << "," << fmt17(v.b) << "," << fmt17(v.c)
               << "\n";
        }
    }
    return os.str();
}

}  // namespace sb
