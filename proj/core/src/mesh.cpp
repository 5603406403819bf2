#include "qwg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace qwg {

void GeometryTee::validate() const {
    if (!(L > 0) || !std::isfinite(L)) throw MeshError("truncation half-length L must be positive");
    if (!with_stub) return;
    if (!(ell > 1.0 && ell < 2.0)) throw MeshError("stub width ell must lie in (1, 2)");
    if (!(H > 1.0) || !std::isfinite(H)) throw MeshError("stub height H must exceed 1");
    if (!(L > 0.5 * ell)) throw MeshError("L must exceed ell/2");
}

double GeometryTee::area() const {
    return 2.0 * L + (with_stub ? ell * (H - 0.5) : 0.0);
}

GeometryTee GeometryTee::strip(double L) {
    GeometryTee g;
    g.L = L;
    g.with_stub = false;
    return g;
}

const char* tag_name(BoundaryTag t) {
    switch (t) {
    case BoundaryTag::wall: return "wall";
    case BoundaryTag::face_left: return "face_left";
    case BoundaryTag::face_right: return "face_right";
    case BoundaryTag::symmetry_plane: return "symmetry_plane";
    case BoundaryTag::lid: return "lid";
    }
    return "?";
}

BoundaryTag tag_from_name(const std::string& s) {
    for (auto t : {BoundaryTag::wall, BoundaryTag::face_left, BoundaryTag::face_right,
                   BoundaryTag::symmetry_plane, BoundaryTag::lid})
        if (s == tag_name(t)) return t;
    throw MeshError("unknown boundary tag '" + s + "'");
}

double Mesh::signed_area(std::size_t t) const {
    const auto& v = triangles[t];
    const Eigen::Vector2d a = nodes[v[1]] - nodes[v[0]];
    const Eigen::Vector2d b = nodes[v[2]] - nodes[v[0]];
    return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

double Mesh::area() const {
    double s = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) s += signed_area(t);
    return s;
}

double Mesh::min_angle_deg() const {
    double mn = 180.0;
    for (const auto& v : triangles) {
        for (int i = 0; i < 3; ++i) {
            const Eigen::Vector2d a = nodes[v[(i + 1) % 3]] - nodes[v[i]];
            const Eigen::Vector2d b = nodes[v[(i + 2) % 3]] - nodes[v[i]];
            const double c = a.dot(b) / (a.norm() * b.norm());
            mn = std::min(mn, std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi);
        }
    }
    return mn;
}

std::vector<int> Mesh::nodes_with_tag(BoundaryTag t) const {
    std::vector<int> out;
    for (const auto& e : boundary_edges) {
        if (e.tag != t) continue;
        out.push_back(e.nodes[0]);
        out.push_back(e.nodes[1]);
        if (e.mid >= 0) out.push_back(e.mid);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool Mesh::has_tag(BoundaryTag t) const {
    return std::any_of(boundary_edges.begin(), boundary_edges.end(),
                       [t](const BoundaryEdge& e) { return e.tag == t; });
}

void Mesh::write(std::ostream& os) const {
    os << "qwg-mesh 1\norder " << order << "\n";
    os << std::setprecision(17);
    os << "nodes " << nodes.size() << "\n";
    for (const auto& p : nodes) os << p.x() << ' ' << p.y() << '\n';
    os << "triangles " << triangles.size() << "\n";
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const auto& v = triangles[t];
        os << v[0] << ' ' << v[1] << ' ' << v[2];
        if (order == 2) os << ' ' << midside[t][0] << ' ' << midside[t][1] << ' ' << midside[t][2];
        os << '\n';
    }
    os << "edges " << boundary_edges.size() << "\n";
    for (const auto& e : boundary_edges)
        os << e.nodes[0] << ' ' << e.nodes[1] << ' ' << e.mid << ' ' << tag_name(e.tag) << ' ' << e.triangle << ' '
           << e.local_edge << '\n';
    os << "periodic " << periodic_pairs.size() << "\n";
    for (const auto& p : periodic_pairs) os << p.first << ' ' << p.second << '\n';
}

Mesh Mesh::read(std::istream& is) {
    auto expect = [&](const std::string& key) {
        std::string k;
        if (!(is >> k) || k != key) throw MeshError("mesh file: expected '" + key + "'");
    };
    Mesh m;
    int version = 0;
    expect("qwg-mesh");
    is >> version;
    if (version != 1) throw MeshError("mesh file: unsupported version");
    expect("order");
    is >> m.order;
    if (m.order != 1 && m.order != 2) throw MeshError("mesh file: order must be 1 or 2");
    std::size_t n = 0;
    expect("nodes");
    is >> n;
    m.nodes.resize(n);
    for (auto& p : m.nodes) is >> p.x() >> p.y();
    expect("triangles");
    is >> n;
    m.triangles.resize(n);
    if (m.order == 2) m.midside.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        is >> m.triangles[t][0] >> m.triangles[t][1] >> m.triangles[t][2];
        if (m.order == 2) is >> m.midside[t][0] >> m.midside[t][1] >> m.midside[t][2];
    }
    expect("edges");
    is >> n;
    m.boundary_edges.resize(n);
    for (auto& e : m.boundary_edges) {
        std::string tag;
        is >> e.nodes[0] >> e.nodes[1] >> e.mid >> tag >> e.triangle >> e.local_edge;
        e.tag = tag_from_name(tag);
    }
    expect("periodic");
    is >> n;
    m.periodic_pairs.resize(n);
    for (auto& p : m.periodic_pairs) is >> p.first >> p.second;
    if (!is) throw MeshError("mesh file: truncated or malformed");
    return m;
}

namespace {

int segments(double len, double h) {
    return std::max(1, static_cast<int>(std::lround(len / h)));
}

// Tensor lattice coordinates through the given breaks; breaks are hit exactly.
std::vector<double> lattice(const std::vector<double>& breaks, const std::vector<int>& segs) {
    std::vector<double> xs{breaks.front()};
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double a = breaks[k], b = breaks[k + 1];
        for (int s = 1; s < segs[k]; ++s) xs.push_back(a + (b - a) * s / segs[k]);
        xs.push_back(b);
    }
    return xs;
}

std::vector<double> refine(const std::vector<double>& xs) {
    std::vector<double> r;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        r.push_back(xs[i]);
        r.push_back(0.5 * (xs[i] + xs[i + 1]));
    }
    r.push_back(xs.back());
    return r;
}

enum class Side { bottom, right, top, left };

struct LatticeSpec {
    std::vector<double> xs, ys;
    std::function<bool(double, double)> inside;              // cell centre test
    std::function<BoundaryTag(Side, double, double)> tagger; // side midpoint
    bool periodic = false;
};

Mesh build_lattice(const LatticeSpec& lat, int order) {
    if (order != 1 && order != 2) throw MeshError("element order must be 1 or 2");
    const int nx = static_cast<int>(lat.xs.size()) - 1;
    const int ny = static_cast<int>(lat.ys.size()) - 1;
    const std::vector<double> rx = order == 2 ? refine(lat.xs) : lat.xs;
    const std::vector<double> ry = order == 2 ? refine(lat.ys) : lat.ys;
    const int f = order; // lattice index scale
    const int rnx = static_cast<int>(rx.size());

    std::vector<char> active(static_cast<std::size_t>(nx) * ny, 0);
    auto act = [&](int i, int j) -> bool {
        if (i < 0 || j < 0 || i >= nx || j >= ny) return false;
        return active[static_cast<std::size_t>(j) * nx + i] != 0;
    };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            active[static_cast<std::size_t>(j) * nx + i] =
                lat.inside(0.5 * (lat.xs[i] + lat.xs[i + 1]), 0.5 * (lat.ys[j] + lat.ys[j + 1])) ? 1 : 0;

    // Mark used refined lattice points, then number them row by row.
    std::vector<int> id(rx.size() * ry.size(), -1);
    auto rid = [&](int I, int J) -> int& { return id[static_cast<std::size_t>(J) * rnx + I]; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            if (act(i, j))
                for (int dj = 0; dj <= f; ++dj)
                    for (int di = 0; di <= f; ++di) rid(f * i + di, f * j + dj) = 0;
    Mesh m;
    m.order = order;
    for (std::size_t J = 0; J < ry.size(); ++J)
        for (int I = 0; I < rnx; ++I)
            if (rid(I, static_cast<int>(J)) == 0) {
                rid(I, static_cast<int>(J)) = static_cast<int>(m.nodes.size());
                m.nodes.emplace_back(rx[I], ry[J]);
            }

    auto mid_of = [&](int I0, int J0, int I1, int J1) { return rid((I0 + I1) / 2, (J0 + J1) / 2); };

    auto add_tri = [&](std::array<std::array<int, 2>, 3> c) -> int {
        std::array<int, 3> v{};
        for (int k = 0; k < 3; ++k) v[k] = rid(c[k][0], c[k][1]);
        m.triangles.push_back(v);
        if (order == 2) {
            std::array<int, 3> md{};
            for (int k = 0; k < 3; ++k) {
                const auto& a = c[k];
                const auto& b = c[(k + 1) % 3];
                md[k] = mid_of(a[0], a[1], b[0], b[1]);
            }
            m.midside.push_back(md);
        }
        return static_cast<int>(m.triangles.size()) - 1;
    };

    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (!act(i, j)) continue;
            const std::array<int, 2> A{f * i, f * j}, B{f * (i + 1), f * j}, C{f * (i + 1), f * (j + 1)},
                D{f * i, f * (j + 1)};
            const double xc = 0.5 * (lat.xs[i] + lat.xs[i + 1]);
            // owner triangle and local edge for bottom, right, top, left
            std::array<std::pair<int, int>, 4> own{};
            if (xc < 0) {
                const int t1 = add_tri({A, B, C});
                const int t2 = add_tri({A, C, D});
                own = {{{t1, 0}, {t1, 1}, {t2, 1}, {t2, 2}}};
            } else {
                const int t1 = add_tri({A, B, D});
                const int t2 = add_tri({B, C, D});
                own = {{{t1, 0}, {t2, 0}, {t2, 1}, {t1, 2}}};
            }
            const std::array<std::pair<int, int>, 4> nb{{{i, j - 1}, {i + 1, j}, {i, j + 1}, {i - 1, j}}};
            for (int s = 0; s < 4; ++s) {
                if (act(nb[s].first, nb[s].second)) continue;
                const auto [t, le] = own[s];
                BoundaryEdge e;
                e.triangle = t;
                e.local_edge = le;
                e.nodes = {m.triangles[t][le], m.triangles[t][(le + 1) % 3]};
                if (order == 2) e.mid = m.midside[t][le];
                const Eigen::Vector2d mp = 0.5 * (m.nodes[e.nodes[0]] + m.nodes[e.nodes[1]]);
                e.tag = lat.tagger(static_cast<Side>(s), mp.x(), mp.y());
                m.boundary_edges.push_back(e);
            }
        }
    }

    if (lat.periodic) {
        std::map<long long, int> left, right;
        const double x0 = lat.xs.front(), x1 = lat.xs.back();
        for (int J = 0; J < static_cast<int>(ry.size()); ++J) {
            const int l = rid(0, J), r = rid(rnx - 1, J);
            if ((l >= 0) != (r >= 0)) throw MeshError("periodic faces do not match");
            if (l >= 0) {
                if (m.nodes[l].x() != x0 || m.nodes[r].x() != x1) throw MeshError("periodic face misplaced");
                m.periodic_pairs.emplace_back(l, r);
            }
        }
    }
    return m;
}

const double kTol = 1e-12;

LatticeSpec tee_spec(const GeometryTee& g, double h, const MeshLayout& layout, double xmin, double xmax,
                     bool half) {
    std::vector<double> xb{xmin};
    if (g.with_stub) {
        if (-0.5 * g.ell > xmin) xb.push_back(-0.5 * g.ell);
    }
    if (xmax > 0) {
        xb.push_back(0.0);
        if (g.with_stub && 0.5 * g.ell < xmax) xb.push_back(0.5 * g.ell);
    }
    xb.push_back(xmax);
    std::vector<int> xsg;
    for (std::size_t k = 0; k + 1 < xb.size(); ++k) xsg.push_back(segments(xb[k + 1] - xb[k], h));

    std::vector<double> yb{-0.5, 0.5};
    std::vector<int> ysg{segments(1.0, h)};
    if (g.with_stub) {
        const double base = layout.lid_row_base;
        if (base > 0.5 && base < g.H) {
            yb.push_back(base);
            ysg.push_back(layout.stub_rows > 0 ? layout.stub_rows : segments(base - 0.5, h));
            yb.push_back(g.H);
            ysg.push_back(1);
        } else {
            yb.push_back(g.H);
            ysg.push_back(layout.stub_rows > 0 ? layout.stub_rows : segments(g.H - 0.5, h));
        }
    }

    LatticeSpec s;
    s.xs = lattice(xb, xsg);
    s.ys = lattice(yb, ysg);
    const double ell = g.ell, H = g.H;
    const bool stub = g.with_stub;
    s.inside = [=](double x, double y) {
        if (y > -0.5 && y < 0.5) return true;
        return stub && std::abs(x) < 0.5 * ell && y > 0.5 && y < H;
    };
    s.tagger = [=](Side side, double x, double y) {
        if (side == Side::left && std::abs(x - xmin) < kTol) return BoundaryTag::face_left;
        if (side == Side::right && std::abs(x - xmax) < kTol)
            return half ? BoundaryTag::symmetry_plane : BoundaryTag::face_right;
        if (stub && side == Side::top && std::abs(y - H) < kTol && std::abs(x) < 0.5 * ell)
            return BoundaryTag::lid;
        return BoundaryTag::wall;
    };
    return s;
}

} // namespace

Mesh build_tee_mesh(const GeometryTee& g, double h, int order, const MeshLayout& layout) {
    g.validate();
    if (!(h > 0)) throw MeshError("mesh size must be positive");
    return build_lattice(tee_spec(g, h, layout, -g.L, g.L, false), order);
}

Mesh build_half_mesh(const GeometryTee& g, double h, int order, const MeshLayout& layout) {
    g.validate();
    if (!(h > 0)) throw MeshError("mesh size must be positive");
    return build_lattice(tee_spec(g, h, layout, -g.L, 0.0, true), order);
}

Mesh build_cell_mesh(const GeometryTee& g, double eps, double h, int order) {
    if (!(eps > 0 && eps < 1)) throw MeshError("eps must lie in (0, 1)");
    const double X = 0.5 / eps;
    if (g.with_stub && X <= 0.5 * g.ell) throw MeshError("stub wider than the periodicity cell");
    GeometryTee c = g;
    c.L = X;
    c.validate();
    if (!(h > 0)) throw MeshError("mesh size must be positive");
    LatticeSpec s = tee_spec(c, h, {}, -X, X, false);
    s.periodic = true;
    return build_lattice(s, order);
}

Mesh build_rectangle_mesh(double x0, double x1, double y0, double y1, double h, int order) {
    if (!(x1 > x0 && y1 > y0 && h > 0)) throw MeshError("invalid rectangle");
    LatticeSpec s;
    const double xm = 0.5 * (x0 + x1);
    s.xs = lattice({x0, xm, x1}, {segments(xm - x0, h), segments(x1 - xm, h)});
    s.ys = lattice({y0, y1}, {segments(y1 - y0, h)});
    s.inside = [](double, double) { return true; };
    s.tagger = [](Side, double, double) { return BoundaryTag::wall; };
    // diagonal direction keys off the sign of x, so build centred and shift back
    for (auto& x : s.xs) x -= xm;
    Mesh m = build_lattice(s, order);
    for (auto& p : m.nodes) p.x() += xm;
    return m;
}

} // namespace qwg
