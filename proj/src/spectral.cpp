#include "stressbasis/spectral.hpp"

#include "stressbasis/util.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sb {

void legendre_derivatives(double t, int n, std::array<std::vector<double>, 4>& P)
{
    for (auto& v : P) v.assign(n + 1, 0.0);
    P[0][0] = 1.0;
    if (n >= 1) {
        P[0][1] = t;
        P[1][1] = 1.0;
    }
    for (int k = 1; k < n; ++k) {
        for (int d = 0; d < 4; ++d) {
            double lower = d > 0 ? P[d - 1][k] : 0.0;
            P[d][k + 1] = ((2 * k + 1) * (t * P[d][k] + d * lower) - k * P[d][k - 1]) / (k + 1);
        }
    }
}

std::array<Eigen::MatrixXd, 4> Family1D::matrices(const std::vector<double>& x) const
{
    std::array<Eigen::MatrixXd, 4> D;
    const int K = size();
    for (auto& m : D) m.resize(static_cast<Eigen::Index>(x.size()), K);
    std::array<std::vector<double>, 4> buf;
    for (std::size_t i = 0; i < x.size(); ++i) {
        eval(x[i], buf);
        for (int d = 0; d < 4; ++d)
            for (int k = 0; k < K; ++k) D[d](static_cast<Eigen::Index>(i), k) = buf[d][k];
    }
    return D;
}

ShenFamily::ShenFamily(Kind kind, int n, double a_, double b_) : kind_(kind), n_(n)
{
    if (n < 1) throw std::invalid_argument("spectral family needs at least one function");
    if (!(b_ > a_)) throw std::invalid_argument("spectral family interval must have b > a");
    a = a_;
    b = b_;
}

std::string ShenFamily::id() const
{
    return std::string(kind_ == Kind::Dirichlet ? "dirichlet" : "clamped") + " " + std::to_string(n_) + " " +
           fmt17(a) + " " + fmt17(b);
}

void ShenFamily::eval(double x, std::array<std::vector<double>, 4>& out) const
{
    const double t = 2.0 * (x - a) / (b - a) - 1.0;
    const double s = 2.0 / (b - a);
    thread_local std::array<std::vector<double>, 4> P;
    legendre_derivatives(t, n_ + 4, P);
    for (auto& v : out) v.assign(n_, 0.0);
    double sc = 1.0;
    for (int d = 0; d < 4; ++d) {
        for (int k = 0; k < n_; ++k) {
            double v;
            if (kind_ == Kind::Dirichlet) {
                v = P[d][k] - P[d][k + 2];
            } else {
                double c2 = -2.0 * (2 * k + 5) / (2.0 * k + 7), c4 = (2 * k + 3) / (2.0 * k + 7);
                v = P[d][k] + c2 * P[d][k + 2] + c4 * P[d][k + 4];
            }
            out[d][k] = sc * v;
        }
        sc *= s;
    }
}

std::shared_ptr<Family1D> family_from_id(const std::string& id)
{
    std::istringstream in(id);
    std::string kind;
    int n = 0;
    double a = 0, b = 0;
    if (!(in >> kind >> n >> a >> b)) throw std::runtime_error("bad family descriptor '" + id + "'");
    if (kind == "dirichlet") return std::make_shared<ShenFamily>(ShenFamily::Kind::Dirichlet, n, a, b);
    if (kind == "clamped") return std::make_shared<ShenFamily>(ShenFamily::Kind::Clamped, n, a, b);
    throw std::runtime_error("unknown family kind '" + kind + "'");
}

GenEigResult generalized_eigen(const Eigen::MatrixXd& S, const Eigen::MatrixXd& M, int count)
{
    const Eigen::Index n = M.rows();
    if (S.rows() != n || S.cols() != n || M.cols() != n) throw std::invalid_argument("generalized_eigen: size mismatch");
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(M(i, i) > 0.0)) throw std::runtime_error("generalized_eigen: mass matrix has a non-positive diagonal");
        d(i) = 1.0 / std::sqrt(M(i, i));
    }
    Eigen::MatrixXd Ms = d.asDiagonal() * M * d.asDiagonal();
    Eigen::MatrixXd Ss = d.asDiagonal() * S * d.asDiagonal();
    Ms = 0.5 * (Ms + Ms.transpose()).eval();
    Ss = 0.5 * (Ss + Ss.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(Ms);
    if (em.info() != Eigen::Success) throw std::runtime_error("generalized_eigen: mass eigensolver failed");
    const Eigen::VectorXd& ev = em.eigenvalues();
    const double top = ev.maxCoeff();
    Eigen::Index first = 0;
    while (first < n && ev(first) <= 1e-13 * top) ++first;
    const Eigen::Index keep = n - first;
    if (keep < count)
        throw std::runtime_error("requested " + std::to_string(count) + " modes but the discrete space has only " +
                                 std::to_string(keep));
    Eigen::MatrixXd Z = em.eigenvectors().rightCols(keep) *
                        ev.tail(keep).cwiseSqrt().cwiseInverse().asDiagonal();
    Eigen::MatrixXd T = Z.transpose() * Ss * Z;
    T = 0.5 * (T + T.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    if (es.info() != Eigen::Success) throw std::runtime_error("generalized_eigen: eigensolver did not converge");
    GenEigResult r;
    r.values = es.eigenvalues().head(count);
    r.vectors = d.asDiagonal() * (Z * es.eigenvectors().leftCols(count));
    r.dropped = static_cast<int>(first);
    r.mass_condition = top / ev(first);
    return r;
}

}  // namespace sb
