#include "stressbasis/mesh.hpp"

#include "stressbasis/quadrature.hpp"
#include "stressbasis/util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sb {

void validate_domain(const Domain& d)
{
    if (const auto* r = std::get_if<Rectangle>(&d)) {
        if (!(r->Lx > 0.0) || !(r->Ly > 0.0)) throw std::invalid_argument("rectangle sides must be positive");
    } else {
        const auto& a = std::get<Annulus>(d);
        if (!(a.ra > 0.0) || !(a.ra < a.rb)) throw std::invalid_argument("annulus requires 0 < r_a < r_b");
    }
}

std::string describe(const Domain& d)
{
    if (const auto* r = std::get_if<Rectangle>(&d)) return "rectangle " + fmt17(r->Lx) + " " + fmt17(r->Ly);
    const auto& a = std::get<Annulus>(d);
    return "annulus " + fmt17(a.ra) + " " + fmt17(a.rb);
}

Point2 Mesh::qp(std::size_t i) const
{
    if (kind == MeshKind::Radial) return {qx[i], 0.0};
    return {qx[i % qx.size()], qy[i / qx.size()]};
}

double Mesh::qweight(std::size_t i) const
{
    if (kind == MeshKind::Radial) return wx[i] * qx[i];
    return wx[i % qx.size()] * wy[i / qx.size()];
}

bool Mesh::has_line(char axis, double value, double tol) const
{
    const auto& lines = (kind == MeshKind::Radial || axis == 'x') ? xlines : ylines;
    double scale = std::max(1.0, std::abs(lines.back()));
    for (double v : lines)
        if (std::abs(v - value) <= tol * scale) return true;
    return false;
}

std::string Mesh::hash() const
{
    return hex64(fnv1a(mesh_to_string(*this)));
}

double Mesh::measure() const
{
    double s = 0.0;
    if (kind == MeshKind::Radial) {
        for (std::size_t e = 0; e + 1 < xlines.size(); ++e)
            s += 0.5 * (xlines[e + 1] * xlines[e + 1] - xlines[e] * xlines[e]);
        return s;
    }
    for (std::size_t j = 0; j + 1 < ylines.size(); ++j)
        for (std::size_t i = 0; i + 1 < xlines.size(); ++i)
            s += (xlines[i + 1] - xlines[i]) * (ylines[j + 1] - ylines[j]);
    return s;
}

void Mesh::build_quadrature()
{
    QuadratureRule ref = gauss_legendre(quad_order);
    CompositeRule rx = composite_rule(xlines, ref);
    qx = rx.x;
    wx = rx.w;
    if (kind == MeshKind::Rectangle) {
        CompositeRule ry = composite_rule(ylines, ref);
        qy = ry.x;
        wy = ry.w;
    } else {
        qy.clear();
        wy.clear();
    }
}

namespace {

std::vector<double> uniform_lines(double L, int n)
{
    std::vector<double> v(n + 1);
    for (int i = 0; i <= n; ++i) v[i] = L * i / n;
    v[n] = L;
    return v;
}

void fill_rectangle(Mesh& m)
{
    const int nx = static_cast<int>(m.xlines.size()) - 1;
    const int ny = static_cast<int>(m.ylines.size()) - 1;
    const int cols = 2 * nx + 1, rows = 2 * ny + 1;
    auto coord = [](const std::vector<double>& lines, int k) {
        return (k % 2 == 0) ? lines[k / 2] : 0.5 * (lines[k / 2] + lines[k / 2 + 1]);
    };
    m.nodes.clear();
    m.nodes.reserve(static_cast<std::size_t>(cols) * rows);
    for (int j = 0; j < rows; ++j)
        for (int i = 0; i < cols; ++i) m.nodes.push_back({coord(m.xlines, i), coord(m.ylines, j)});
    auto id = [cols](int i, int j) { return j * cols + i; };
    m.elements.clear();
    m.boundary.clear();
    for (int ey = 0; ey < ny; ++ey) {
        for (int ex = 0; ex < nx; ++ex) {
            int i = 2 * ex, j = 2 * ey;
            m.elements.push_back({id(i, j), id(i + 2, j), id(i + 2, j + 2), id(i, j + 2), id(i + 1, j),
                                  id(i + 2, j + 1), id(i + 1, j + 2), id(i, j + 1), id(i + 1, j + 1)});
        }
    }
    for (int ex = 0; ex < nx; ++ex) m.boundary.push_back({id(2 * ex, 0), id(2 * ex + 2, 0), "bottom"});
    for (int ey = 0; ey < ny; ++ey) m.boundary.push_back({id(cols - 1, 2 * ey), id(cols - 1, 2 * ey + 2), "right"});
    for (int ex = nx - 1; ex >= 0; --ex) m.boundary.push_back({id(2 * ex + 2, rows - 1), id(2 * ex, rows - 1), "top"});
    for (int ey = ny - 1; ey >= 0; --ey) m.boundary.push_back({id(0, 2 * ey + 2), id(0, 2 * ey), "left"});
}

void fill_radial(Mesh& m)
{
    const int nr = static_cast<int>(m.xlines.size()) - 1;
    m.nodes.clear();
    for (int k = 0; k <= 2 * nr; ++k) {
        double r = (k % 2 == 0) ? m.xlines[k / 2] : 0.5 * (m.xlines[k / 2] + m.xlines[k / 2 + 1]);
        m.nodes.push_back({r, 0.0});
    }
    m.elements.clear();
    for (int e = 0; e < nr; ++e) m.elements.push_back({2 * e, 2 * e + 1, 2 * e + 2});
    m.boundary = {{0, 0, "inner"}, {2 * nr, 2 * nr, "outer"}};
}

void check_features(const Mesh& m)
{
    for (const auto& f : m.features) {
        if (m.kind == MeshKind::Radial) throw std::invalid_argument("feature lines are not supported on radial grids");
        if (f.axis != 'x' && f.axis != 'y') throw std::invalid_argument("feature line axis must be x or y");
        const auto& r = std::get<Rectangle>(m.domain);
        double L = f.axis == 'x' ? r.Lx : r.Ly;
        if (!(f.value >= 0.0 && f.value <= L))
            throw std::invalid_argument("feature line " + std::string(1, f.axis) + "=" + fmt17(f.value) + " outside domain");
        if (!m.has_line(f.axis, f.value))
            throw std::invalid_argument("feature line " + std::string(1, f.axis) + "=" + fmt17(f.value) +
                                        " does not fall on an element edge at the requested resolution");
    }
}

}  // namespace

MeshPtr build_rectangle_mesh(const Domain& domain, int nx, int ny, const std::vector<FeatureLine>& feature_lines,
                             int quad_order)
{
    validate_domain(domain);
    const auto* rect = std::get_if<Rectangle>(&domain);
    if (!rect) throw std::invalid_argument("build_rectangle_mesh: domain is not a rectangle");
    if (nx < 4 || ny < 4) throw std::invalid_argument("build_rectangle_mesh: nx and ny must be at least 4");
    if (quad_order < 1) throw std::invalid_argument("quadrature order must be positive");
    auto m = std::make_shared<Mesh>();
    m->kind = MeshKind::Rectangle;
    m->domain = domain;
    m->xlines = uniform_lines(rect->Lx, nx);
    m->ylines = uniform_lines(rect->Ly, ny);
    m->features = feature_lines;
    m->quad_order = quad_order;
    check_features(*m);
    fill_rectangle(*m);
    m->build_quadrature();
    return m;
}

MeshPtr build_radial_grid(const Domain& domain, int nr, int quad_order)
{
    validate_domain(domain);
    const auto* ann = std::get_if<Annulus>(&domain);
    if (!ann) throw std::invalid_argument("build_radial_grid: domain is not an annulus");
    if (nr < 4) throw std::invalid_argument("build_radial_grid: nr must be at least 4");
    if (quad_order < 1) throw std::invalid_argument("quadrature order must be positive");
    auto m = std::make_shared<Mesh>();
    m->kind = MeshKind::Radial;
    m->domain = domain;
    m->xlines.resize(nr + 1);
    for (int i = 0; i <= nr; ++i) m->xlines[i] = ann->ra + (ann->rb - ann->ra) * i / nr;
    m->xlines[nr] = ann->rb;
    m->quad_order = quad_order;
    fill_radial(*m);
    m->build_quadrature();
    return m;
}

MeshPtr with_quadrature(const Mesh& mesh, int quad_order)
{
    if (quad_order < 1) throw std::invalid_argument("quadrature order must be positive");
    auto m = std::make_shared<Mesh>(mesh);
    m->quad_order = quad_order;
    m->build_quadrature();
    return m;
}

MeshPtr refine(const Mesh& mesh, int factor, int quad_order)
{
    if (factor < 1) throw std::invalid_argument("refinement factor must be positive");
    auto sub = [factor](const std::vector<double>& lines) {
        std::vector<double> out;
        for (std::size_t i = 0; i + 1 < lines.size(); ++i)
            for (int k = 0; k < factor; ++k) out.push_back(lines[i] + (lines[i + 1] - lines[i]) * k / factor);
        out.push_back(lines.back());
        return out;
    };
    auto m = std::make_shared<Mesh>();
    m->kind = mesh.kind;
    m->domain = mesh.domain;
    m->features = mesh.features;
    m->quad_order = quad_order;
    m->xlines = sub(mesh.xlines);
    if (mesh.kind == MeshKind::Rectangle) {
        m->ylines = sub(mesh.ylines);
        fill_rectangle(*m);
    } else {
        fill_radial(*m);
    }
    m->build_quadrature();
    return m;
}

std::string mesh_to_string(const Mesh& m)
{
    std::ostringstream os;
    os << "SBMESH 1\n";
    os << "nodes " << m.nodes.size() << "\n";
    for (const auto& p : m.nodes) os << fmt17(p.x) << " " << fmt17(p.y) << "\n";
    os << "elements " << m.elements.size() << "\n";
    for (const auto& e : m.elements) {
        os << (e.size() == 9 ? "q2" : "l3");
        for (int n : e) os << " " << n;
        os << "\n";
    }
    os << "boundary " << m.boundary.size() << "\n";
    for (const auto& b : m.boundary) os << "edge " << b.n1 << " " << b.n2 << " " << b.tag << "\n";
    os << "features " << m.features.size() << "\n";
    for (const auto& f : m.features) os << f.axis << " " << fmt17(f.value) << "\n";
    os << "quadrature " << m.quad_order << "\n";
    return os.str();
}

namespace {

[[noreturn]] void malformed(int line, const std::string& what)
{
    throw std::runtime_error("mesh file line " + std::to_string(line) + ": " + what);
}

std::vector<double> unique_sorted(std::vector<double> v, double tol)
{
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v)
        if (out.empty() || x - out.back() > tol) out.push_back(x);
    return out;
}

int index_of(const std::vector<double>& lines, double v, double tol)
{
    auto it = std::lower_bound(lines.begin(), lines.end(), v - tol);
    if (it == lines.end() || std::abs(*it - v) > tol) return -1;
    return static_cast<int>(it - lines.begin());
}

}  // namespace

MeshPtr mesh_from_string(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    int ln = 0;
    auto next = [&]() -> std::istringstream {
        while (std::getline(in, line)) {
            ++ln;
            if (line.find_first_not_of(" \t\r") != std::string::npos) return std::istringstream(line);
        }
        malformed(ln, "unexpected end of file");
    };
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw std::runtime_error("mesh file is empty");

    auto m = std::make_shared<Mesh>();
    {
        auto s = next();
        std::string magic;
        int version = 0;
        if (!(s >> magic >> version) || magic != "SBMESH") malformed(ln, "expected header 'SBMESH 1'");
        if (version != 1) malformed(ln, "unsupported mesh version " + std::to_string(version));
    }
    auto section = [&](const std::string& name) {
        auto s = next();
        std::string key;
        long long n = -1;
        if (!(s >> key >> n) || key != name || n < 0) malformed(ln, "expected '" + name + " <count>'");
        return static_cast<std::size_t>(n);
    };
    std::size_t nn = section("nodes");
    for (std::size_t i = 0; i < nn; ++i) {
        auto s = next();
        Point2 p;
        if (!(s >> p.x >> p.y) || !std::isfinite(p.x) || !std::isfinite(p.y)) malformed(ln, "bad node coordinates");
        m->nodes.push_back(p);
    }
    std::size_t ne = section("elements");
    std::string etype;
    for (std::size_t i = 0; i < ne; ++i) {
        auto s = next();
        std::string t;
        s >> t;
        if (t != "q2" && t != "l3") malformed(ln, "unknown element type '" + t + "'");
        if (!etype.empty() && t != etype) malformed(ln, "mixed element types");
        etype = t;
        std::size_t nv = t == "q2" ? 9 : 3;
        std::vector<int> conn(nv);
        for (auto& c : conn) {
            if (!(s >> c) || c < 0 || static_cast<std::size_t>(c) >= nn) malformed(ln, "bad element connectivity");
        }
        m->elements.push_back(conn);
    }
    std::size_t nb = section("boundary");
    for (std::size_t i = 0; i < nb; ++i) {
        auto s = next();
        std::string key;
        BoundaryEdge b;
        if (!(s >> key >> b.n1 >> b.n2 >> b.tag) || key != "edge") malformed(ln, "expected 'edge n1 n2 tag'");
        if (b.n1 < 0 || b.n2 < 0 || static_cast<std::size_t>(b.n1) >= nn || static_cast<std::size_t>(b.n2) >= nn)
            malformed(ln, "boundary edge references missing node");
        m->boundary.push_back(b);
    }
    // optional trailing sections
    while (std::getline(in, line)) {
        ++ln;
        std::istringstream s(line);
        std::string key;
        if (!(s >> key)) continue;
        if (key == "features") {
            std::size_t nf = 0;
            s >> nf;
            for (std::size_t i = 0; i < nf; ++i) {
                auto fs = next();
                FeatureLine f;
                if (!(fs >> f.axis >> f.value)) malformed(ln, "bad feature line");
                m->features.push_back(f);
            }
        } else if (key == "quadrature") {
            if (!(s >> m->quad_order) || m->quad_order < 1) malformed(ln, "bad quadrature order");
        } else {
            malformed(ln, "unknown section '" + key + "'");
        }
    }
    if (nn == 0 || ne == 0) throw std::runtime_error("mesh has no nodes or elements");

    if (etype == "l3") {
        m->kind = MeshKind::Radial;
        std::vector<double> rs;
        for (const auto& e : m->elements) {
            const auto& a = m->nodes[e[0]];
            const auto& b = m->nodes[e[2]];
            const auto& c = m->nodes[e[1]];
            if (a.y != 0.0 || b.y != 0.0 || c.y != 0.0) throw std::runtime_error("radial grid nodes must have y = 0");
            if (!(b.x > a.x) || std::abs(c.x - 0.5 * (a.x + b.x)) > 1e-12 * b.x)
                throw std::runtime_error("nonconforming radial element");
            rs.push_back(a.x);
            rs.push_back(b.x);
        }
        m->xlines = unique_sorted(rs, 1e-14);
        if (m->xlines.size() != m->elements.size() + 1) throw std::runtime_error("nonconforming radial grid");
        std::vector<int> used(m->elements.size(), 0);
        for (const auto& e : m->elements) {
            int k = index_of(m->xlines, m->nodes[e[0]].x, 1e-14);
            if (k < 0 || static_cast<std::size_t>(k + 1) >= m->xlines.size() ||
                std::abs(m->nodes[e[2]].x - m->xlines[k + 1]) > 1e-14 || used[k]++)
                throw std::runtime_error("nonconforming radial grid");
        }
        m->domain = Annulus{m->xlines.front(), m->xlines.back()};
        validate_domain(m->domain);
        for (std::string side : {"inner", "outer"}) {
            double r = side == "inner" ? m->xlines.front() : m->xlines.back();
            bool found = false;
            for (const auto& b : m->boundary)
                if (b.tag == side && std::abs(m->nodes[b.n1].x - r) <= 1e-14) found = true;
            if (!found) throw std::runtime_error("untagged boundary edge at r=" + fmt17(r) + " (" + side + ")");
        }
    } else {
        m->kind = MeshKind::Rectangle;
        std::vector<double> xs, ys;
        for (const auto& e : m->elements)
            for (int k = 0; k < 4; ++k) {
                xs.push_back(m->nodes[e[k]].x);
                ys.push_back(m->nodes[e[k]].y);
            }
        double tol = 1e-12 * (1.0 + *std::max_element(xs.begin(), xs.end()) + *std::max_element(ys.begin(), ys.end()));
        m->xlines = unique_sorted(xs, tol);
        m->ylines = unique_sorted(ys, tol);
        const std::size_t nx = m->xlines.size() - 1, ny = m->ylines.size() - 1;
        if (nx < 1 || ny < 1 || m->elements.size() != nx * ny) throw std::runtime_error("nonconforming element layout");
        if (std::abs(m->xlines.front()) > tol || std::abs(m->ylines.front()) > tol)
            throw std::runtime_error("rectangle mesh must start at the origin");
        std::vector<int> used(nx * ny, 0);
        // per element: corners ccw, mid-sides, centre
        const double rx[9] = {0, 1, 1, 0, 0.5, 1, 0.5, 0, 0.5};
        const double ry[9] = {0, 0, 1, 1, 0, 0.5, 1, 0.5, 0.5};
        for (std::size_t k = 0; k < m->elements.size(); ++k) {
            const auto& e = m->elements[k];
            int i = index_of(m->xlines, m->nodes[e[0]].x, tol);
            int j = index_of(m->ylines, m->nodes[e[0]].y, tol);
            if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= nx || static_cast<std::size_t>(j) >= ny)
                throw std::runtime_error("nonconforming element " + std::to_string(k));
            double x0 = m->xlines[i], x1 = m->xlines[i + 1], y0 = m->ylines[j], y1 = m->ylines[j + 1];
            for (int v = 0; v < 9; ++v) {
                const auto& p = m->nodes[e[v]];
                if (std::abs(p.x - (x0 + rx[v] * (x1 - x0))) > tol || std::abs(p.y - (y0 + ry[v] * (y1 - y0))) > tol)
                    throw std::runtime_error("nonconforming element " + std::to_string(k));
            }
            if (used[j * nx + i]++) throw std::runtime_error("overlapping element " + std::to_string(k));
        }
        // every boundary side must carry a tag
        std::map<std::pair<int, int>, std::string> tags;
        for (const auto& b : m->boundary) tags[{std::min(b.n1, b.n2), std::max(b.n1, b.n2)}] = b.tag;
        const double Lx = m->xlines.back(), Ly = m->ylines.back();
        for (const auto& e : m->elements) {
            for (int s = 0; s < 4; ++s) {
                int a = e[s], b = e[(s + 1) % 4];
                const auto& pa = m->nodes[a];
                const auto& pb = m->nodes[b];
                std::string expect;
                if (std::abs(pa.y) <= tol && std::abs(pb.y) <= tol) expect = "bottom";
                else if (std::abs(pa.x - Lx) <= tol && std::abs(pb.x - Lx) <= tol) expect = "right";
                else if (std::abs(pa.y - Ly) <= tol && std::abs(pb.y - Ly) <= tol) expect = "top";
                else if (std::abs(pa.x) <= tol && std::abs(pb.x) <= tol) expect = "left";
                if (expect.empty()) continue;
                auto it = tags.find({std::min(a, b), std::max(a, b)});
                if (it == tags.end())
                    throw std::runtime_error("untagged boundary edge " + std::to_string(a) + "-" + std::to_string(b) +
                                             " on the " + expect + " side");
                if (it->second != expect)
                    throw std::runtime_error("boundary edge " + std::to_string(a) + "-" + std::to_string(b) +
                                             " tagged '" + it->second + "' but lies on the " + expect + " side");
            }
        }
        m->domain = Rectangle{Lx, Ly};
        validate_domain(m->domain);
        check_features(*m);
    }
    m->build_quadrature();
    return m;
}

void save_mesh(const Mesh& mesh, const std::string& path)
{
    write_file_atomic(path, mesh_to_string(mesh));
}

MeshPtr load_mesh(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open mesh file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return mesh_from_string(ss.str());
}

}  // namespace sb
