#include "stressbasis/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace sb {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(Principle p)
{
    switch (p) {
    case Principle::SE: return "SE";
    case Principle::PT: return "PT";
    case Principle::PTBody: return "PT_body";
    }
    return "?";
}

Principle principle_from_string(const std::string& s)
{
    if (s == "SE") return Principle::SE;
    if (s == "PT") return Principle::PT;
    if (s == "PT_body") return Principle::PTBody;
    throw std::invalid_argument("unknown principle '" + s + "' (expected SE, PT or PT_body)");
}

MatrixXd energy_gram(const Material& m, const std::vector<const SymTensorField2*>& fields)
{
    const Index n = static_cast<Index>(fields.size());
    MatrixXd G = MatrixXd::Zero(n, n);
    if (n == 0) return G;
    const MeshPtr& mesh = fields.front()->mesh();
    for (const auto* f : fields)
        if (f->mesh() != mesh) throw std::invalid_argument("energy_gram: fields live on different meshes");
    std::map<std::pair<int, int>, std::vector<Index>> groups;
    for (Index i = 0; i < n; ++i) {
        const auto& t = fields[static_cast<std::size_t>(i)]->tag();
        groups[t ? std::make_pair(t->m, static_cast<int>(t->parity)) : std::make_pair(-1, 0)].push_back(i);
    }
    const std::size_t nq = mesh->num_qp();
    const std::size_t chunk = 2048;
    for (const auto& [key, idx] : groups) {
        std::optional<AzimuthalTag> tag = fields[static_cast<std::size_t>(idx.front())]->tag();
        EnergyWeights ew = energy_weights(m, *mesh, tag);
        const Index k = static_cast<Index>(idx.size());
        MatrixXd g = MatrixXd::Zero(k, k);
        for (std::size_t q0 = 0; q0 < nq; q0 += chunk) {
            const std::size_t q1 = std::min(nq, q0 + chunk);
            const Index rows = static_cast<Index>(3 * (q1 - q0));
            MatrixXd X(rows, k), KX(rows, k);
            for (Index c = 0; c < k; ++c) {
                const auto& v = fields[static_cast<std::size_t>(idx[static_cast<std::size_t>(c)])]->values();
                for (std::size_t q = q0; q < q1; ++q) {
                    const Index r = static_cast<Index>(3 * (q - q0));
                    const Sym2& s = v[q];
                    const auto& K = ew.K[q];
                    X(r, c) = s.a;
                    X(r + 1, c) = s.b;
                    X(r + 2, c) = s.c;
                    KX(r, c) = K[0] * s.a + K[1] * s.b + K[2] * s.c;
                    KX(r + 1, c) = K[3] * s.a + K[4] * s.b + K[5] * s.c;
                    KX(r + 2, c) = K[6] * s.a + K[7] * s.b + K[8] * s.c;
                }
            }
            g.noalias() += X.transpose() * KX;
        }
        g = 0.5 * (g + g.transpose()).eval();
        for (Index i = 0; i < k; ++i)
            for (Index j = 0; j < k; ++j) G(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]) = g(i, j);
    }
    return G;
}

namespace {

void check_N(const BasisSet& basis, int N)
{
    if (N < 0) throw std::invalid_argument("N must be non-negative");
    if (static_cast<std::size_t>(N) > basis.size())
        throw std::invalid_argument("N=" + std::to_string(N) + " exceeds the basis size " + std::to_string(basis.size()));
}

void check_mesh(const BasisSet& basis, const SymTensorField2& sigma_p)
{
    if (sigma_p.mesh() != basis.mesh) throw std::invalid_argument("sigma_p and the basis live on different meshes");
}

std::vector<const SymTensorField2*> mode_ptrs(const BasisSet& basis, int N)
{
    std::vector<const SymTensorField2*> out;
    for (int i = 0; i < N; ++i) out.push_back(&basis.modes[static_cast<std::size_t>(i)].field);
    return out;
}

/// Trace projections t_i = <g, trace phi_i> and ||g||^2 for g = trace sigma_p - shift.
std::pair<VectorXd, double> trace_projections(const SymTensorField2& sigma_p, const BasisSet& basis, int N,
                                              const ScalarField* shift)
{
    const Mesh& mesh = *basis.mesh;
    const std::size_t nq = mesh.num_qp();
    std::vector<double> g(nq);
    const double tw = sigma_p.tag() ? theta_weight(*sigma_p.tag()) : 1.0;
    double gg = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
        g[q] = sigma_p.values()[q].trace() - (shift ? shift->values()[q] : 0.0);
        gg += tw * mesh.qweight(q) * g[q] * g[q];
    }
    VectorXd t = VectorXd::Zero(N);
    for (int i = 0; i < N; ++i) {
        const auto& f = basis.modes[static_cast<std::size_t>(i)].field;
        if (f.tag() != sigma_p.tag()) continue;
        double s = 0.0;
        for (std::size_t q = 0; q < nq; ++q) s += mesh.qweight(q) * g[q] * f.values()[q].trace();
        t[i] = tw * s;
    }
    return {t, gg};
}

Approximation trace_solve(Principle principle, const SymTensorField2& sigma_p, const BasisSet& basis, int N,
                          const ScalarField* shift)
{
    check_N(basis, N);
    check_mesh(basis, sigma_p);
    auto [t, gg] = trace_projections(sigma_p, basis, N, shift);
    Approximation ap;
    ap.principle = principle;
    ap.coeffs = -t;
    ap.sigma_p = sigma_p;
    ap.sigma_N = N > 0 ? sigma_p + basis.combination(ap.coeffs) : sigma_p;
    const MatrixXd& T = basis.trace_gram;
    for (int n = 0; n <= N; ++n) {
        VectorXd a = ap.coeffs.head(n);
        double obj = gg + 2.0 * a.dot(t.head(n)) + a.dot(T.topLeftCorner(n, n) * a);
        StepDiagnostics s;
        s.n = n;
        s.a_n = n > 0 ? a[n - 1] : 0.0;
        s.objective = obj;
        s.trace = obj;
        ap.steps.push_back(s);
    }
    if (shift) {
        // trace energy of sigma^n itself
        auto [t0, g0] = trace_projections(sigma_p, basis, N, nullptr);
        for (int n = 0; n <= N; ++n) {
            VectorXd a = ap.coeffs.head(n);
            ap.steps[static_cast<std::size_t>(n)].trace =
                g0 + 2.0 * a.dot(t0.head(n)) + a.dot(T.topLeftCorner(n, n) * a);
        }
    }
    return ap;
}

}  // namespace

SESystem assemble_se_system(const BasisSet& basis, const SymTensorField2& sigma_p, const Material& m, int N)
{
    check_N(basis, N);
    check_mesh(basis, sigma_p);
    auto ptrs = mode_ptrs(basis, N);
    ptrs.push_back(&sigma_p);
    MatrixXd G = energy_gram(m, ptrs);
    SESystem s;
    s.M = G.topLeftCorner(N, N);
    s.f = -G.col(N).head(N);
    s.energy_p = G(N, N);
    return s;
}

VectorXd Approximation::coefficients(int n) const
{
    if (n < 0 || n > N()) throw std::invalid_argument("step outside 0..N");
    if (principle == Principle::SE) return nested[static_cast<std::size_t>(n)];
    return coeffs.head(n);
}

Approximation solve_strain_energy(const SymTensorField2& sigma_p, const BasisSet& basis, const Material& m, int N,
                                  const SymTensorField2* reference)
{
    check_N(basis, N);
    check_mesh(basis, sigma_p);
    SESystem sys = assemble_se_system(basis, sigma_p, m, N);
    Approximation ap;
    ap.principle = Principle::SE;
    ap.sigma_p = sigma_p;
    ap.nested.push_back(VectorXd());
    if (N > 0) {
        Eigen::LLT<MatrixXd> llt(sys.M);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("strain-energy matrix is not positive definite (broken basis or material)");
        const MatrixXd L = llt.matrixL();
        for (Index i = 0; i < N; ++i)
            if (!(L(i, i) > 0.0)) throw std::runtime_error("strain-energy factorization produced a zero pivot");
        // the leading n x n block of L factors the leading block of M
        VectorXd y = L.triangularView<Eigen::Lower>().solve(sys.f);
        for (int n = 1; n <= N; ++n) {
            VectorXd a = L.topLeftCorner(n, n).transpose().triangularView<Eigen::Upper>().solve(y.head(n));
            ap.nested.push_back(a);
        }
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(sys.M, Eigen::EigenvaluesOnly);
        ap.condition = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
    }
    ap.coeffs = N > 0 ? ap.nested.back() : VectorXd();
    ap.sigma_N = N > 0 ? sigma_p + basis.combination(ap.coeffs) : sigma_p;
    auto [t, gg] = trace_projections(sigma_p, basis, N, nullptr);
    const MatrixXd& T = basis.trace_gram;
    for (int n = 0; n <= N; ++n) {
        const VectorXd& a = ap.nested[static_cast<std::size_t>(n)];
        StepDiagnostics s;
        s.n = n;
        s.a_n = n > 0 ? a[n - 1] : 0.0;
        s.energy = sys.energy_p - 2.0 * a.dot(sys.f.head(n)) + a.dot(sys.M.topLeftCorner(n, n) * a);
        s.objective = s.energy;
        s.trace = gg + 2.0 * a.dot(t.head(n)) + a.dot(T.topLeftCorner(n, n) * a);
        ap.steps.push_back(s);
    }
    if (reference) attach_energy_diagnostics(ap, basis, m, reference);
    return ap;
}

Approximation solve_planar_trace(const SymTensorField2& sigma_p, const BasisSet& basis, int N)
{
    return trace_solve(Principle::PT, sigma_p, basis, N, nullptr);
}

Approximation solve_planar_trace_body(const SymTensorField2& sigma_p, const BasisSet& basis, const ScalarField& V,
                                      double nu, int N)
{
    if (V.mesh() != basis.mesh) throw std::invalid_argument("potential and basis live on different meshes");
    if (!(nu >= 0.0 && nu <= 0.49)) throw std::invalid_argument("Poisson's ratio must lie in [0, 0.49]");
    std::vector<double> s(V.values().size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = V.values()[i] / (1.0 - nu);
    ScalarField shift(V.mesh(), std::move(s), V.tag());
    return trace_solve(Principle::PTBody, sigma_p, basis, N, &shift);
}

void attach_energy_diagnostics(Approximation& ap, const BasisSet& basis, const Material& m,
                               const SymTensorField2* reference)
{
    const int N = ap.N();
    auto ptrs = mode_ptrs(basis, N);
    ptrs.push_back(&ap.sigma_p);
    SymTensorField2 d;
    if (reference) {
        require_compatible(*reference, ap.sigma_p);
        d = *reference - ap.sigma_p;
        ptrs.push_back(&d);
        ptrs.push_back(reference);
    }
    MatrixXd G = energy_gram(m, ptrs);
    const MatrixXd M = G.topLeftCorner(N, N);
    const VectorXd f = -G.col(N).head(N);
    const double ep = G(N, N);
    for (int n = 0; n <= N; ++n) {
        VectorXd a = ap.coefficients(n);
        auto& s = ap.steps[static_cast<std::size_t>(n)];
        s.energy = ep - 2.0 * a.dot(f.head(n)) + a.dot(M.topLeftCorner(n, n) * a);
        if (reference) {
            const VectorXd h = G.col(N + 1).head(N);
            const double dd = G(N + 1, N + 1), tt = G(N + 2, N + 2);
            if (!(tt > 0.0)) throw std::invalid_argument("reference stress has zero energy");
            double e2 = dd - 2.0 * a.dot(h.head(n)) + a.dot(M.topLeftCorner(n, n) * a);
            s.error = std::sqrt(std::max(e2, 0.0) / tt);
        }
    }
}

}  // namespace sb
