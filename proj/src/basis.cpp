#include "stressbasis/basis.hpp"

#include "stressbasis/loading.hpp"
#include "stressbasis/util.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sb {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

SourcePtr ModeGenerator::source(const VectorXd& c) const
{
    auto self = shared_from_this();
    return std::make_shared<TensorSource>(TensorSource{[self, c](double x, double y) { return self->evaluate(c, x, y); }, {}});
}

namespace {

MatrixXd kron(const MatrixXd& A, const MatrixXd& B)
{
    MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

MatrixXd weighted_gram(const MatrixXd& D, const VectorXd& w)
{
    return D.transpose() * w.asDiagonal() * D;
}

VectorXd to_vec(const std::vector<double>& v)
{
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size()));
}

class RectangleGenerator final : public ModeGenerator {
public:
    RectangleGenerator(MeshPtr mesh, std::shared_ptr<Family1D> fx, std::shared_ptr<Family1D> fy)
        : mesh_(std::move(mesh)), fx_(std::move(fx)), fy_(std::move(fy))
    {
        if (mesh_->kind != MeshKind::Rectangle) throw std::invalid_argument("rectangle generator needs a rectangle mesh");
        F_ = fx_->matrices(mesh_->qx);
        G_ = fy_->matrices(mesh_->qy);
        VectorXd wx = to_vec(mesh_->wx), wy = to_vec(mesh_->wy);
        std::array<MatrixXd, 4> A, B;
        for (int k = 0; k < 4; ++k) {
            A[k] = weighted_gram(F_[k], wx);
            B[k] = weighted_gram(G_[k], wy);
        }
        M_ = kron(A[0], B[2]) + kron(A[2], B[0]) + 2.0 * kron(A[1], B[1]);
        S_ = kron(A[3], B[0]) + 3.0 * kron(A[2], B[1]) + 3.0 * kron(A[1], B[2]) + kron(A[0], B[3]);
    }

    std::string id() const override { return "rect;" + fx_->id() + ";" + fy_->id(); }
    Index dim() const override { return static_cast<Index>(fx_->size()) * fy_->size(); }
    std::optional<AzimuthalTag> tag() const override { return std::nullopt; }
    const MeshPtr& mesh() const override { return mesh_; }
    const MatrixXd& mass() const override { return M_; }
    const MatrixXd& stiffness() const override { return S_; }

    SymTensorField2 sample(const VectorXd& c, bool with_gradient) const override
    {
        if (c.size() != dim()) throw std::invalid_argument("coefficient length mismatch");
        Eigen::Map<const RowMat> C(c.data(), fx_->size(), fy_->size());
        auto P = [&](int a, int b) -> MatrixXd { return F_[a] * C * G_[b].transpose(); };
        const std::size_t n = mesh_->num_qp();
        std::vector<Sym2> v(n), g1, g2;
        MatrixXd p02 = P(0, 2), p20 = P(2, 0), p11 = P(1, 1);
        for (std::size_t i = 0; i < n; ++i) v[i] = {p02.data()[i], p20.data()[i], -p11.data()[i]};
        if (with_gradient) {
            MatrixXd p12 = P(1, 2), p30 = P(3, 0), p21 = P(2, 1), p03 = P(0, 3);
            g1.resize(n);
            g2.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                g1[i] = {p12.data()[i], p30.data()[i], -p21.data()[i]};
                g2[i] = {p03.data()[i], p21.data()[i], -p12.data()[i]};
            }
        }
        return SymTensorField2(mesh_, std::move(v), std::nullopt, std::move(g1), std::move(g2), source(c));
    }

    Jet evaluate(const VectorXd& c, double x, double y) const override
    {
        std::array<std::vector<double>, 4> ex, ey;
        fx_->eval(x, ex);
        fy_->eval(y, ey);
        const int kx = fx_->size(), ky = fy_->size();
        double p[4][4] = {};
        for (int i = 0; i < kx; ++i) {
            double row[4] = {0, 0, 0, 0};
            for (int j = 0; j < ky; ++j) {
                double cij = c[i * ky + j];
                if (cij == 0.0) continue;
                for (int b = 0; b < 4; ++b) row[b] += cij * ey[b][j];
            }
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b + a <= 3; ++b) p[a][b] += ex[a][i] * row[b];
        }
        Jet j;
        j.v = {p[0][2], p[2][0], -p[1][1]};
        j.d1 = {p[1][2], p[3][0], -p[2][1]};
        j.d2 = {p[0][3], p[2][1], -p[1][2]};
        return j;
    }

private:
    MeshPtr mesh_;
    std::shared_ptr<Family1D> fx_, fy_;
    std::array<MatrixXd, 4> F_, G_;
    MatrixXd M_, S_;
};

struct RadialProfiles {
    MatrixXd A, B, S, dA, dB, dS;
};

class RadialGenerator final : public ModeGenerator {
public:
    RadialGenerator(MeshPtr mesh, AzimuthalTag tag, std::shared_ptr<Family1D> fam)
        : mesh_(std::move(mesh)), tag_(tag), fam_(std::move(fam))
    {
        if (mesh_->kind != MeshKind::Radial) throw std::invalid_argument("radial generator needs a radial grid");
        prof_ = profiles(mesh_->qx);
        const VectorXd r = to_vec(mesh_->qx);
        const VectorXd w = to_vec(mesh_->wx).cwiseProduct(r) * theta_weight(tag_);
        const double m = tag_.m;
        const auto& P = prof_;
        M_ = P.A.transpose() * w.asDiagonal() * P.A + P.B.transpose() * w.asDiagonal() * P.B +
             2.0 * P.S.transpose() * w.asDiagonal() * P.S;
        VectorXd w2 = w.cwiseQuotient(r.cwiseProduct(r));
        MatrixXd u = m * P.A + 2.0 * P.S, v = m * P.B - 2.0 * P.S, s = m * P.S + P.A - P.B;
        S_ = P.dA.transpose() * w.asDiagonal() * P.dA + P.dB.transpose() * w.asDiagonal() * P.dB +
             2.0 * P.dS.transpose() * w.asDiagonal() * P.dS + u.transpose() * w2.asDiagonal() * u +
             v.transpose() * w2.asDiagonal() * v + 2.0 * s.transpose() * w2.asDiagonal() * s;
    }

    RadialGenerator(const RadialGenerator& other, Parity parity) : RadialGenerator(other)
    {
        tag_.parity = parity;
    }

    std::string id() const override
    {
        return "radial;" + std::to_string(tag_.m) + ";" + (tag_.parity == Parity::Cos ? "cos" : "sin") + ";" +
               fam_->id();
    }
    Index dim() const override { return fam_->size(); }
    std::optional<AzimuthalTag> tag() const override { return tag_; }
    const MeshPtr& mesh() const override { return mesh_; }
    const MatrixXd& mass() const override { return M_; }
    const MatrixXd& stiffness() const override { return S_; }

    SymTensorField2 sample(const VectorXd& c, bool with_gradient) const override
    {
        if (c.size() != dim()) throw std::invalid_argument("coefficient length mismatch");
        VectorXd a = prof_.A * c, b = prof_.B * c, s = prof_.S * c;
        const std::size_t n = mesh_->num_qp();
        std::vector<Sym2> v(n), g1, g2;
        for (std::size_t i = 0; i < n; ++i) v[i] = {a[i], b[i], s[i]};
        if (with_gradient) {
            VectorXd da = prof_.dA * c, db = prof_.dB * c, ds = prof_.dS * c;
            g1.resize(n);
            g2.assign(n, Sym2{});
            for (std::size_t i = 0; i < n; ++i) g1[i] = {da[i], db[i], ds[i]};
        }
        return SymTensorField2(mesh_, std::move(v), tag_, std::move(g1), std::move(g2), source(c));
    }

    Jet evaluate(const VectorXd& c, double r, double) const override
    {
        RadialProfiles P = profiles({r});
        Jet j;
        j.v = {(P.A * c)(0), (P.B * c)(0), (P.S * c)(0)};
        j.d1 = {(P.dA * c)(0), (P.dB * c)(0), (P.dS * c)(0)};
        return j;
    }

private:
    RadialProfiles profiles(const std::vector<double>& rs) const
    {
        auto D = fam_->matrices(rs);
        const VectorXd r = to_vec(rs);
        const VectorXd ir = r.cwiseInverse(), ir2 = ir.cwiseProduct(ir), ir3 = ir2.cwiseProduct(ir);
        const double m = tag_.m;
        RadialProfiles P;
        const Index n = D[0].rows(), K = D[0].cols();
        if (tag_.m == 0) {
            P.A = ir.asDiagonal() * D[0];
            P.B = D[1];
            P.S = MatrixXd::Zero(n, K);
            P.dA = ir.asDiagonal() * D[1] - ir2.asDiagonal() * D[0];
            P.dB = D[2];
            P.dS = MatrixXd::Zero(n, K);
        } else if (tag_.m == 1) {
            P.A = D[0];
            P.S = D[0];
            P.B = 2.0 * D[0] + r.asDiagonal() * D[1];
            P.dA = D[1];
            P.dS = D[1];
            P.dB = 3.0 * D[1] + r.asDiagonal() * D[2];
        } else {
            P.A = ir.asDiagonal() * D[1] - m * m * (ir2.asDiagonal() * D[0]);
            P.B = D[2];
            P.S = m * (ir.asDiagonal() * D[1] - ir2.asDiagonal() * D[0]);
            P.dA = ir.asDiagonal() * D[2] - (1.0 + m * m) * (ir2.asDiagonal() * D[1]) +
                   2.0 * m * m * (ir3.asDiagonal() * D[0]);
            P.dB = D[3];
            P.dS = m * (ir.asDiagonal() * D[2] - 2.0 * (ir2.asDiagonal() * D[1]) + 2.0 * (ir3.asDiagonal() * D[0]));
        }
        return P;
    }

    MeshPtr mesh_;
    AzimuthalTag tag_;
    std::shared_ptr<Family1D> fam_;
    RadialProfiles prof_;
    MatrixXd M_, S_;
};

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

GeneratorPtr make_rectangle_generator(const MeshPtr& mesh, std::shared_ptr<Family1D> fx, std::shared_ptr<Family1D> fy)
{
    return std::make_shared<RectangleGenerator>(mesh, std::move(fx), std::move(fy));
}

GeneratorPtr make_radial_generator(const MeshPtr& mesh, const AzimuthalTag& tag, int n)
{
    const auto& ann = std::get<Annulus>(mesh->domain);
    auto kind = tag.m <= 1 ? ShenFamily::Kind::Dirichlet : ShenFamily::Kind::Clamped;
    return std::make_shared<RadialGenerator>(mesh, tag, std::make_shared<ShenFamily>(kind, n, ann.ra, ann.rb));
}

GeneratorPtr generator_from_id(const MeshPtr& mesh, const std::string& id)
{
    auto parts = split(id, ';');
    if (parts.size() == 3 && parts[0] == "rect")
        return make_rectangle_generator(mesh, family_from_id(parts[1]), family_from_id(parts[2]));
    if (parts.size() == 4 && parts[0] == "radial") {
        AzimuthalTag tag{std::stoi(parts[1]), parts[2] == "sin" ? Parity::Sin : Parity::Cos};
        return std::make_shared<RadialGenerator>(mesh, tag, family_from_id(parts[3]));
    }
    throw std::runtime_error("unknown generator descriptor '" + id + "'");
}

std::string Provenance::hash() const
{
    return hex64(fnv1a(backend + "|" + mesh_hash + "|" + params + "|" + fmt17(degenerate_threshold)));
}

BasisSet BasisSet::truncated(std::size_t n) const
{
    if (n > modes.size()) throw std::invalid_argument("basis has only " + std::to_string(modes.size()) + " modes");
    BasisSet b;
    b.mesh = mesh;
    b.modes.assign(modes.begin(), modes.begin() + static_cast<std::ptrdiff_t>(n));
    b.provenance = provenance;
    const Index k = static_cast<Index>(n);
    if (gram_l2.rows() >= k) b.gram_l2 = gram_l2.topLeftCorner(k, k);
    if (trace_gram.rows() >= k) b.trace_gram = trace_gram.topLeftCorner(k, k);
    return b;
}

SymTensorField2 BasisSet::combination(const VectorXd& a) const
{
    if (static_cast<std::size_t>(a.size()) > modes.size()) throw std::invalid_argument("too many coefficients");
    std::vector<std::pair<GeneratorPtr, VectorXd>> parts;
    for (Index j = 0; j < a.size(); ++j) {
        const auto& md = modes[static_cast<std::size_t>(j)];
        auto it = std::find_if(parts.begin(), parts.end(), [&](const auto& p) { return p.first == md.generator; });
        if (it == parts.end()) {
            parts.emplace_back(md.generator, VectorXd::Zero(md.generator->dim()));
            it = parts.end() - 1;
        }
        it->second += a[j] * md.coeffs;
    }
    if (parts.empty()) {
        std::optional<AzimuthalTag> tag;
        if (!modes.empty()) tag = modes.front().field.tag();
        return constant_field(mesh, Sym2{}, tag);
    }
    std::optional<SymTensorField2> sum;
    for (const auto& [g, c] : parts) {
        if (sum && sum->tag() != g->tag()) {
            if (c.norm() == 0.0) continue;
            throw std::invalid_argument("cannot combine modes with different wavenumber tags into one field");
        }
        SymTensorField2 f = g->sample(c, true);
        sum = sum ? sum->axpy(1.0, f) : f;
    }
    return *sum;
}

void BasisSet::compute_grams()
{
    const Index n = static_cast<Index>(modes.size());
    gram_l2 = MatrixXd::Zero(n, n);
    trace_gram = MatrixXd::Zero(n, n);
    if (n == 0) return;
    // group modes by wavenumber tag; distinct tags are orthogonal analytically
    std::map<std::pair<int, int>, std::vector<Index>> groups;
    for (Index i = 0; i < n; ++i) {
        const auto& t = modes[static_cast<std::size_t>(i)].field.tag();
        groups[t ? std::make_pair(t->m, static_cast<int>(t->parity)) : std::make_pair(-1, 0)].push_back(i);
    }
    const std::size_t nq = mesh->num_qp();
    for (const auto& [key, idx] : groups) {
        const double tw = key.first >= 0 ? theta_weight({key.first, static_cast<Parity>(key.second)}) : 1.0;
        MatrixXd X(3 * static_cast<Index>(nq), static_cast<Index>(idx.size()));
        MatrixXd T(static_cast<Index>(nq), static_cast<Index>(idx.size()));
        for (std::size_t c = 0; c < idx.size(); ++c) {
            const auto& v = modes[static_cast<std::size_t>(idx[c])].field.values();
            for (std::size_t q = 0; q < nq; ++q) {
                double sw = std::sqrt(tw * mesh->qweight(q));
                X(3 * q, c) = sw * v[q].a;
                X(3 * q + 1, c) = sw * v[q].b;
                X(3 * q + 2, c) = std::sqrt(2.0) * sw * v[q].c;
                T(q, c) = sw * v[q].trace();
            }
        }
        MatrixXd g = X.transpose() * X, t = T.transpose() * T;
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < idx.size(); ++j) {
                gram_l2(idx[i], idx[j]) = g(i, j);
                trace_gram(idx[i], idx[j]) = t(i, j);
            }
    }
}

int default_rectangle_spectral_size(int n_modes)
{
    return std::max(12, static_cast<int>(std::ceil(std::sqrt(3.5 * n_modes))) + 2);
}

int default_radial_spectral_size(int n_modes)
{
    return std::max(16, static_cast<int>(std::ceil(2.0 * n_modes)) + 10);
}

int recommended_quadrature_order(int n, int nel, MeshKind kind)
{
    const double per_function = kind == MeshKind::Radial ? 12.0 : 6.0;
    return std::max(3, static_cast<int>(std::ceil(per_function * (n + 4) / nel)));
}

namespace {

void check_resolution(int K, int nel, int order, MeshKind kind)
{
    if (order < recommended_quadrature_order(K, nel, kind))
        throw std::invalid_argument("quadrature order " + std::to_string(order) + " on " + std::to_string(nel) +
                                    " elements is too coarse for " + std::to_string(K) +
                                    " spectral functions (need order >= " +
                                    std::to_string(recommended_quadrature_order(K, nel, kind)) + ")");
}

BasisMode make_mode(const GeneratorPtr& g, const VectorXd& c, double lambda)
{
    return BasisMode{g->sample(c, false), lambda, g, c};
}

}  // namespace

BasisSet solve_basis_rectangle(const MeshPtr& mesh, const EigenSolveConfig& cfg)
{
    if (!mesh || mesh->kind != MeshKind::Rectangle) throw std::invalid_argument("solve_basis_rectangle needs a rectangle mesh");
    if (cfg.n_modes < 1) throw std::invalid_argument("n_modes must be at least 1");
    const auto& rect = std::get<Rectangle>(mesh->domain);
    const int K = cfg.spectral_size > 0 ? cfg.spectral_size : default_rectangle_spectral_size(cfg.n_modes);
    check_resolution(K, static_cast<int>(std::min(mesh->xlines.size(), mesh->ylines.size())) - 1, mesh->quad_order,
                     MeshKind::Rectangle);
    auto g = make_rectangle_generator(mesh, std::make_shared<ShenFamily>(ShenFamily::Kind::Clamped, K, 0.0, rect.Lx),
                                      std::make_shared<ShenFamily>(ShenFamily::Kind::Clamped, K, 0.0, rect.Ly));
    if (cfg.n_modes > g->dim() / 2)
        throw std::invalid_argument("n_modes exceeds half of the discrete subspace dimension " + std::to_string(g->dim()));
    GenEigResult eig = generalized_eigen(g->stiffness(), g->mass(), cfg.n_modes);
    BasisSet b;
    b.mesh = mesh;
    for (int i = 0; i < cfg.n_modes; ++i) b.modes.push_back(make_mode(g, eig.vectors.col(i), eig.values(i)));
    b.provenance.backend = "spectral-airy-rectangle";
    b.provenance.mesh_hash = mesh->hash();
    b.provenance.params = "n_modes=" + std::to_string(cfg.n_modes) + " K=" + std::to_string(K) + " quad=" +
                          std::to_string(mesh->quad_order) + " mass_cond=" + fmt17(eig.mass_condition) +
                          " dropped=" + std::to_string(eig.dropped);
    b.provenance.degenerate_threshold = cfg.degenerate_threshold;
    return orthonormalize(b, cfg.degenerate_threshold);
}

BasisSet solve_basis_annulus(const MeshPtr& mesh, const std::vector<int>& wavenumbers, const EigenSolveConfig& cfg)
{
    if (!mesh || mesh->kind != MeshKind::Radial) throw std::invalid_argument("solve_basis_annulus needs a radial grid");
    if (cfg.n_modes < 1) throw std::invalid_argument("n_modes must be at least 1");
    if (wavenumbers.empty()) throw std::invalid_argument("no wavenumbers requested");
    const int K = cfg.spectral_size > 0 ? cfg.spectral_size : default_radial_spectral_size(cfg.n_modes);
    check_resolution(K, static_cast<int>(mesh->xlines.size()) - 1, mesh->quad_order, MeshKind::Radial);
    std::vector<BasisMode> all;
    std::vector<int> ms = wavenumbers;
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    std::string params = "n_modes=" + std::to_string(cfg.n_modes) + " K=" + std::to_string(K) + " quad=" +
                         std::to_string(mesh->quad_order) + " m=";
    for (int m : ms) {
        if (m < 0) throw std::invalid_argument("wavenumbers must be non-negative");
        params += std::to_string(m) + ",";
        auto gc = make_radial_generator(mesh, {m, Parity::Cos}, K);
        const int count = std::min<int>(cfg.n_modes, static_cast<int>(gc->dim()) / 2);
        GenEigResult eig = generalized_eigen(gc->stiffness(), gc->mass(), count);
        GeneratorPtr gs;
        if (m > 0 && cfg.keep_sin_family)
            gs = std::make_shared<RadialGenerator>(dynamic_cast<const RadialGenerator&>(*gc), Parity::Sin);
        for (int i = 0; i < count; ++i) {
            all.push_back(make_mode(gc, eig.vectors.col(i), eig.values(i)));
            if (gs) all.push_back(make_mode(gs, eig.vectors.col(i), eig.values(i)));
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const BasisMode& x, const BasisMode& y) {
        if (x.lambda != y.lambda) return x.lambda < y.lambda;
        const auto& tx = *x.field.tag();
        const auto& ty = *y.field.tag();
        if (tx.m != ty.m) return tx.m < ty.m;
        return static_cast<int>(tx.parity) < static_cast<int>(ty.parity);
    });
    if (all.size() > static_cast<std::size_t>(cfg.n_modes)) all.resize(static_cast<std::size_t>(cfg.n_modes));
    BasisSet b;
    b.mesh = mesh;
    b.modes = std::move(all);
    b.provenance.backend = "spectral-radial";
    b.provenance.mesh_hash = mesh->hash();
    b.provenance.params = params + (cfg.keep_sin_family ? " families=cos,sin" : " families=cos");
    b.provenance.degenerate_threshold = cfg.degenerate_threshold;
    return orthonormalize(b, cfg.degenerate_threshold);
}

BasisSet orthonormalize(const BasisSet& in, double thr)
{
    BasisSet b = in;
    auto rescale = [](BasisMode& md, double s) {
        md.field = md.field.scaled(s).without_source();
        md.coeffs *= s;
    };
    auto refresh = [](BasisMode& md) { md.field = md.generator->sample(md.coeffs, false); };
    for (auto& md : b.modes) {
        double n = l2_norm(md.field);
        if (!(n > 0.0)) throw std::runtime_error("basis contains a zero mode");
        rescale(md, 1.0 / n);
        refresh(md);
    }
    // degenerate clusters
    std::size_t i = 0;
    while (i < b.modes.size()) {
        std::size_t j = i + 1;
        while (j < b.modes.size() && b.modes[i].lambda > 0.0 &&
               b.modes[j].lambda - b.modes[j - 1].lambda <= thr * b.modes[j - 1].lambda)
            ++j;
        if (j - i > 1) {
            std::vector<std::size_t> order(j - i);
            std::iota(order.begin(), order.end(), i);
            std::vector<double> tn(b.modes.size());
            for (auto k : order) {
                ScalarField t = planar_trace(b.modes[k].field);
                tn[k] = l2_inner_scalar(t, t);
            }
            std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return tn[x] > tn[y]; });
            std::vector<BasisMode> cluster;
            for (auto k : order) cluster.push_back(b.modes[k]);
            for (std::size_t p = 0; p < cluster.size(); ++p) {
                for (int pass = 0; pass < 2; ++pass)
                    for (std::size_t q = 0; q < p; ++q) {
                        if (cluster[q].generator != cluster[p].generator) continue;
                        double d = l2_inner_tensor(cluster[p].field, cluster[q].field);
                        cluster[p].coeffs -= d * cluster[q].coeffs;
                        refresh(cluster[p]);
                    }
                double n = l2_norm(cluster[p].field);
                if (!(n > 1e-8)) throw std::runtime_error("rank deficiency inside a degenerate eigenvalue cluster");
                rescale(cluster[p], 1.0 / n);
                refresh(cluster[p]);
            }
            for (std::size_t k = 0; k < cluster.size(); ++k) b.modes[i + k] = cluster[k];
        }
        i = j;
    }
    // sign convention: the largest-magnitude sampled component is positive
    for (auto& md : b.modes) {
        double best = 0.0;
        for (const auto& v : md.field.values())
            for (double c : {v.a, v.b, v.c})
                if (std::abs(c) > std::abs(best)) best = c;
        if (best < 0.0) {
            rescale(md, -1.0);
            refresh(md);
        }
    }
    b.compute_grams();
    return b;
}

BasisSet airy_bump_basis(const MeshPtr& mesh, int n)
{
    if (!mesh || mesh->kind != MeshKind::Rectangle) throw std::invalid_argument("airy_bump_basis needs a rectangle mesh");
    if (n < 1) throw std::invalid_argument("airy_bump_basis needs n >= 1");
    const auto& rect = std::get<Rectangle>(mesh->domain);
    const int k = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    auto g = make_rectangle_generator(mesh, std::make_shared<ShenFamily>(ShenFamily::Kind::Clamped, k, 0.0, rect.Lx),
                                      std::make_shared<ShenFamily>(ShenFamily::Kind::Clamped, k, 0.0, rect.Ly));
    // shells: all (i, j) with max(i, j) = s, in lexicographic order
    std::vector<std::pair<int, int>> pairs;
    for (int s = 0; s < k; ++s)
        for (int i = 0; i <= s; ++i)
            for (int j = 0; j <= s; ++j)
                if (std::max(i, j) == s) pairs.emplace_back(i, j);
    pairs.resize(static_cast<std::size_t>(n));
    const MatrixXd& M = g->mass();
    std::vector<VectorXd> q;
    int dropped = 0;
    for (auto [i, j] : pairs) {
        VectorXd c = VectorXd::Zero(g->dim());
        c[i * k + j] = 1.0;
        const double n0 = std::sqrt(c.dot(M * c));
        c /= n0;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& p : q) c -= p.dot(M * c) * p;
        double nn = std::sqrt(c.dot(M * c));
        if (!(nn > 1e-7)) {
            ++dropped;
            continue;
        }
        q.push_back(c / nn);
    }
    BasisSet b;
    b.mesh = mesh;
    for (const auto& c : q) b.modes.push_back(make_mode(g, c, 0.0));
    b.provenance.backend = "airy-bump";
    b.provenance.mesh_hash = mesh->hash();
    b.provenance.params = "n=" + std::to_string(n) + " k=" + std::to_string(k) + " dropped=" + std::to_string(dropped);
    return orthonormalize(b);
}

std::string BasisReport::summary() const
{
    std::ostringstream os;
    os << "L2 offdiag " << max_l2_offdiag << " (diag err " << max_l2_diag_error << ") " << (pass_l2 ? "ok" : "FAIL")
       << "; H1 offdiag " << max_h1_offdiag_rel << " " << (pass_h1 ? "ok" : "FAIL") << "; equilibrium "
       << max_equilibrium << " " << (pass_equilibrium ? "ok" : "FAIL") << "; traction " << max_traction << " "
       << (pass_traction ? "ok" : "FAIL") << "; trace-gram diff " << max_trace_gram_diff << "; rayleigh "
       << max_rayleigh_rel;
    return os.str();
}

BasisReport verify_basis(const BasisSet& basis, const BasisTolerances& tol)
{
    BasisReport r;
    BasisSet b = basis;
    b.compute_grams();
    const Index n = static_cast<Index>(b.size());
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            if (i == j) r.max_l2_diag_error = std::max(r.max_l2_diag_error, std::abs(b.gram_l2(i, i) - 1.0));
            else r.max_l2_offdiag = std::max(r.max_l2_offdiag, std::abs(b.gram_l2(i, j)));
            r.max_trace_gram_diff = std::max(r.max_trace_gram_diff, std::abs(b.trace_gram(i, j) - b.gram_l2(i, j)));
        }
    // H1 Gram through each generator's stiffness; modes from distinct generators are orthogonal in theta.
    // Only eigen backends promise H1 orthogonality.
    std::vector<double> h1(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const auto& mi = b.modes[static_cast<std::size_t>(i)];
        h1[static_cast<std::size_t>(i)] = mi.coeffs.dot(mi.generator->stiffness() * mi.coeffs);
        if (mi.lambda > 0.0)
            r.max_rayleigh_rel =
                std::max(r.max_rayleigh_rel, std::abs(h1[static_cast<std::size_t>(i)] - mi.lambda) / mi.lambda);
    }
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) {
            const auto& mi = b.modes[static_cast<std::size_t>(i)];
            const auto& mj = b.modes[static_cast<std::size_t>(j)];
            if (mi.generator != mj.generator || mi.lambda <= 0.0 || mj.lambda <= 0.0) continue;
            double v = mi.coeffs.dot(mi.generator->stiffness() * mj.coeffs);
            r.max_h1_offdiag_rel = std::max(
                r.max_h1_offdiag_rel,
                std::abs(v) / std::sqrt(h1[static_cast<std::size_t>(i)] * h1[static_cast<std::size_t>(j)]));
        }
    for (const auto& md : b.modes) {
        SymTensorField2 f = md.generator->sample(md.coeffs, true);
        LoadingSpec none;
        none.tag = f.tag();
        EquilibriumResidual e = equilibrium_residual(f, none);
        double sup = 0.0;
        for (const auto& v : f.values()) sup = std::max({sup, std::abs(v.a), std::abs(v.b), std::abs(v.c)});
        r.max_equilibrium = std::max(r.max_equilibrium, e.interior_norm / std::max(e.field_norm, 1e-300));
        r.max_traction = std::max(r.max_traction, e.boundary_mismatch / std::max(sup, 1e-300));
    }
    r.pass_l2 = r.max_l2_offdiag <= tol.l2_offdiag && r.max_l2_diag_error <= tol.l2_diag;
    r.pass_h1 = r.max_h1_offdiag_rel <= tol.h1_offdiag;
    r.pass_equilibrium = r.max_equilibrium <= tol.equilibrium;
    r.pass_traction = r.max_traction <= tol.traction;
    return r;
}

std::string basis_to_string(const BasisSet& b, bool nodal)
{
    std::ostringstream os;
    os << "SBBASIS 1\n";
    os << "backend " << b.provenance.backend << "\n";
    os << "mesh " << b.mesh->hash() << "\n";
    os << "params " << b.provenance.params << "\n";
    os << "threshold " << fmt17(b.provenance.degenerate_threshold) << "\n";
    std::string mt = mesh_to_string(*b.mesh);
    os << "mesh_text " << std::count(mt.begin(), mt.end(), '\n') << "\n" << mt;
    std::vector<GeneratorPtr> gens;
    for (const auto& md : b.modes)
        if (std::find(gens.begin(), gens.end(), md.generator) == gens.end()) gens.push_back(md.generator);
    os << "generators " << gens.size() << "\n";
    for (const auto& g : gens) os << g->id() << "\n";
    os << "modes " << b.modes.size() << "\n";
    for (const auto& md : b.modes) {
        auto gi = std::find(gens.begin(), gens.end(), md.generator) - gens.begin();
        os << "mode " << fmt17(md.lambda) << " " << gi << " " << md.coeffs.size();
        for (Index k = 0; k < md.coeffs.size(); ++k) os << " " << fmt17(md.coeffs[k]);
        os << "\n";
    }
    if (nodal) {
        os << "nodal " << b.modes.size() << " " << b.mesh->nodes.size() << "\n";
        for (const auto& md : b.modes)
            for (const auto& p : b.mesh->nodes) {
                Sym2 v = md.generator->evaluate(md.coeffs, p.x, p.y).v;
                os << fmt17(v.a) << " " << fmt17(v.b) << " " << fmt17(v.c) << "\n";
            }
    }
    return os.str();
}

BasisSet basis_from_string(const std::string& text, const MeshPtr& mesh_in)
{
    std::istringstream in(text);
    std::string line, key;
    auto expect = [&](const std::string& k) {
        if (!std::getline(in, line)) throw std::runtime_error("basis file truncated before '" + k + "'");
        std::istringstream s(line);
        s >> key;
        if (key != k) throw std::runtime_error("basis file: expected '" + k + "', found '" + line + "'");
        std::string rest;
        std::getline(s, rest);
        if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
        return rest;
    };
    if (!std::getline(in, line) || line != "SBBASIS 1") throw std::runtime_error("not a SBBASIS 1 file");
    BasisSet b;
    b.provenance.backend = expect("backend");
    std::string hash = expect("mesh");
    b.provenance.params = expect("params");
    b.provenance.degenerate_threshold = std::stod(expect("threshold"));
    std::size_t nl = std::stoul(expect("mesh_text"));
    std::string mt;
    for (std::size_t i = 0; i < nl; ++i) {
        if (!std::getline(in, line)) throw std::runtime_error("basis file: truncated mesh");
        mt += line + "\n";
    }
    if (mesh_in) {
        if (mesh_in->hash() != hash) throw std::runtime_error("basis file was built on a different mesh");
        b.mesh = mesh_in;
    } else {
        b.mesh = mesh_from_string(mt);
        if (b.mesh->hash() != hash) throw std::runtime_error("basis file mesh hash mismatch");
    }
    b.provenance.mesh_hash = hash;
    std::size_t ng = std::stoul(expect("generators"));
    std::vector<GeneratorPtr> gens;
    for (std::size_t i = 0; i < ng; ++i) {
        if (!std::getline(in, line)) throw std::runtime_error("basis file: truncated generators");
        gens.push_back(generator_from_id(b.mesh, line));
    }
    std::size_t nm = std::stoul(expect("modes"));
    for (std::size_t i = 0; i < nm; ++i) {
        if (!std::getline(in, line)) throw std::runtime_error("basis file: truncated modes");
        std::istringstream s(line);
        double lambda;
        std::size_t gi;
        Index nc;
        if (!(s >> key >> lambda >> gi >> nc) || key != "mode" || gi >= gens.size() || nc != gens[gi]->dim())
            throw std::runtime_error("basis file: bad mode line");
        VectorXd c(nc);
        for (Index k = 0; k < nc; ++k)
            if (!(s >> c[k])) throw std::runtime_error("basis file: bad coefficient");
        b.modes.push_back(BasisMode{gens[gi]->sample(c, false), lambda, gens[gi], c});
    }
    b.compute_grams();
    return b;
}

void save_basis(const BasisSet& basis, const std::string& path, bool nodal)
{
    write_file_atomic(path, basis_to_string(basis, nodal));
}

BasisSet load_basis(const std::string& path, const MeshPtr& mesh)
{
    return basis_from_string(read_file(path), mesh);
}

}  // namespace sb
