#include "qwg/fem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <set>

namespace qwg {

namespace {

using Vec2 = Eigen::Vector2d;

// Degree-4 rule on the reference triangle (weights sum to 1/2).
struct TriQuad {
    std::array<std::array<double, 3>, 6> bary;
    std::array<double, 6> w;
};

const TriQuad& tri_quad() {
    static const TriQuad q = [] {
        TriQuad r{};
        const double a = 0.445948490915965, wa = 0.223381589678011;
        const double b = 0.091576213509771, wb = 0.109951743655322;
        r.bary = {{{1 - 2 * a, a, a}, {a, 1 - 2 * a, a}, {a, a, 1 - 2 * a},
                   {1 - 2 * b, b, b}, {b, 1 - 2 * b, b}, {b, b, 1 - 2 * b}}};
        r.w = {0.5 * wa, 0.5 * wa, 0.5 * wa, 0.5 * wb, 0.5 * wb, 0.5 * wb};
        return r;
    }();
    return q;
}

// Five-point Gauss-Legendre rule on [0, 1].
struct LineQuad {
    std::array<double, 5> s;
    std::array<double, 5> w;
};

const LineQuad& line_quad() {
    static const LineQuad q = [] {
        const std::array<double, 5> x = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                         0.9061798459386640};
        const std::array<double, 5> w = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                         0.4786286704993665, 0.2369268850561891};
        LineQuad r{};
        for (int i = 0; i < 5; ++i) {
            r.s[i] = 0.5 * (x[i] + 1.0);
            r.w[i] = 0.5 * w[i];
        }
        return r;
    }();
    return q;
}

int nodes_per_triangle(int order) { return order == 1 ? 3 : 6; }

// Values and barycentric derivatives of the Lagrange basis; node order is
// corners 0..2 followed by midsides of edges (0,1), (1,2), (2,0).
void tri_shape(int order, const std::array<double, 3>& L, double* N, double (*dN)[3]) {
    if (order == 1) {
        for (int i = 0; i < 3; ++i) {
            N[i] = L[i];
            for (int k = 0; k < 3; ++k) dN[i][k] = i == k ? 1.0 : 0.0;
        }
        return;
    }
    for (int i = 0; i < 6; ++i)
        for (int k = 0; k < 3; ++k) dN[i][k] = 0.0;
    for (int i = 0; i < 3; ++i) {
        N[i] = L[i] * (2 * L[i] - 1);
        dN[i][i] = 4 * L[i] - 1;
    }
    for (int e = 0; e < 3; ++e) {
        const int a = e, b = (e + 1) % 3;
        N[3 + e] = 4 * L[a] * L[b];
        dN[3 + e][a] = 4 * L[b];
        dN[3 + e][b] = 4 * L[a];
    }
}

void line_shape(int order, double s, double* N) {
    if (order == 1) {
        N[0] = 1 - s;
        N[1] = s;
        return;
    }
    N[0] = (1 - s) * (1 - 2 * s);
    N[1] = s * (2 * s - 1);
    N[2] = 4 * s * (1 - s);
}

std::array<int, 6> element_nodes(const Mesh& m, std::size_t t) {
    std::array<int, 6> v{};
    for (int i = 0; i < 3; ++i) v[i] = m.triangles[t][i];
    if (m.order == 2)
        for (int i = 0; i < 3; ++i) v[3 + i] = m.midside[t][i];
    return v;
}

// Physical gradients of the barycentric coordinates; returns twice the area.
double bary_gradients(const Mesh& m, std::size_t t, std::array<Vec2, 3>& g) {
    const auto& v = m.triangles[t];
    const Vec2 p0 = m.nodes[v[0]], p1 = m.nodes[v[1]], p2 = m.nodes[v[2]];
    const double det = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
    g[1] = Vec2(p2.y() - p0.y(), -(p2.x() - p0.x())) / det;
    g[2] = Vec2(-(p1.y() - p0.y()), p1.x() - p0.x()) / det;
    g[0] = -g[1] - g[2];
    return det;
}

void check_mesh(const Mesh& m) {
    if (m.order != 1 && m.order != 2) throw FemError("element order must be 1 or 2");
    if (m.order == 2 && m.midside.size() != m.triangles.size())
        throw FemError("order-2 mesh is missing midside nodes");
}

std::array<int, 3> edge_nodes(const BoundaryEdge& e) { return {e.nodes[0], e.nodes[1], e.mid}; }

} // namespace

double transverse_mode(double y) { return std::numbers::sqrt2 * std::cos(std::numbers::pi * y); }

DofMap DofMap::build(const Mesh& mesh, const std::vector<BoundaryTag>& dirichlet) {
    std::vector<char> fixed(mesh.nodes.size(), 0);
    for (const auto& e : mesh.boundary_edges) {
        if (std::find(dirichlet.begin(), dirichlet.end(), e.tag) == dirichlet.end()) continue;
        fixed[e.nodes[0]] = fixed[e.nodes[1]] = 1;
        if (e.mid >= 0) fixed[e.mid] = 1;
    }
    DofMap d;
    d.node_to_dof.assign(mesh.nodes.size(), -1);
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        if (!fixed[i]) {
            d.node_to_dof[i] = static_cast<int>(d.dof_to_node.size());
            d.dof_to_node.push_back(static_cast<int>(i));
        }
    return d;
}

VecC DofMap::expand(const VecC& u) const {
    if (u.size() != size()) throw FemError("expand: vector length does not match the dof map");
    VecC out = VecC::Zero(static_cast<Eigen::Index>(node_to_dof.size()));
    for (int k = 0; k < size(); ++k) out(dof_to_node[k]) = u(k);
    return out;
}

VecC DofMap::restrict(const VecC& u) const {
    if (u.size() != static_cast<Eigen::Index>(node_to_dof.size()))
        throw FemError("restrict: vector length does not match the node count");
    VecC out(size());
    for (int k = 0; k < size(); ++k) out(k) = u(dof_to_node[k]);
    return out;
}

const std::vector<BoundaryTag>& default_dirichlet_tags() {
    static const std::vector<BoundaryTag> t{BoundaryTag::wall, BoundaryTag::lid};
    return t;
}

SparseOperatorPair assemble(const Mesh& mesh, const std::vector<BoundaryTag>& dirichlet) {
    check_mesh(mesh);
    SparseOperatorPair ops;
    ops.dofs = DofMap::build(mesh, dirichlet);
    ops.n_dof = ops.dofs.size();
    ops.constrained = false;
    const int nb = nodes_per_triangle(mesh.order);
    const auto& q = tri_quad();
    std::vector<Eigen::Triplet<cplx>> tk, tm;
    tk.reserve(mesh.triangles.size() * nb * nb);
    tm.reserve(mesh.triangles.size() * nb * nb);
    double N[6], dN[6][3];
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        std::array<Vec2, 3> gL;
        const double det = bary_gradients(mesh, t, gL);
        if (!(det > 0)) throw FemError("triangle with non-positive orientation");
        Eigen::Matrix<double, 6, 6> ke = Eigen::Matrix<double, 6, 6>::Zero();
        Eigen::Matrix<double, 6, 6> me = Eigen::Matrix<double, 6, 6>::Zero();
        for (std::size_t p = 0; p < q.w.size(); ++p) {
            tri_shape(mesh.order, q.bary[p], N, dN);
            std::array<Vec2, 6> g;
            for (int i = 0; i < nb; ++i) g[i] = dN[i][0] * gL[0] + dN[i][1] * gL[1] + dN[i][2] * gL[2];
            const double w = q.w[p] * det;
            for (int i = 0; i < nb; ++i)
                for (int j = 0; j < nb; ++j) {
                    ke(i, j) += w * g[i].dot(g[j]);
                    me(i, j) += w * N[i] * N[j];
                }
        }
        const auto v = element_nodes(mesh, t);
        for (int i = 0; i < nb; ++i) {
            const int di = ops.dofs.node_to_dof[v[i]];
            if (di < 0) continue;
            for (int j = 0; j < nb; ++j) {
                const int dj = ops.dofs.node_to_dof[v[j]];
                if (dj < 0) continue;
                tk.emplace_back(di, dj, ke(i, j));
                tm.emplace_back(di, dj, me(i, j));
            }
        }
    }
    ops.K.resize(ops.n_dof, ops.n_dof);
    ops.M.resize(ops.n_dof, ops.n_dof);
    ops.K.setFromTriplets(tk.begin(), tk.end());
    ops.M.setFromTriplets(tm.begin(), tm.end());
    ops.K.makeCompressed();
    ops.M.makeCompressed();
    return ops;
}

SpMat assemble_robin(const Mesh& mesh, const DofMap& dofs, BoundaryTag tag, cplx coefficient) {
    check_mesh(mesh);
    if (!mesh.has_tag(tag)) throw FemError(std::string("assemble_robin: no edges tagged ") + tag_name(tag));
    const int nb = mesh.order + 1;
    const auto& q = line_quad();
    std::vector<Eigen::Triplet<cplx>> tr;
    double N[3];
    for (const auto& e : mesh.boundary_edges) {
        if (e.tag != tag) continue;
        const double len = (mesh.nodes[e.nodes[1]] - mesh.nodes[e.nodes[0]]).norm();
        Eigen::Matrix3d be = Eigen::Matrix3d::Zero();
        for (std::size_t p = 0; p < q.w.size(); ++p) {
            line_shape(mesh.order, q.s[p], N);
            for (int i = 0; i < nb; ++i)
                for (int j = 0; j < nb; ++j) be(i, j) += q.w[p] * len * N[i] * N[j];
        }
        const auto en = edge_nodes(e);
        for (int i = 0; i < nb; ++i) {
            const int di = dofs.node_to_dof[en[i]];
            if (di < 0) continue;
            for (int j = 0; j < nb; ++j) {
                const int dj = dofs.node_to_dof[en[j]];
                if (dj >= 0) tr.emplace_back(di, dj, coefficient * be(i, j));
            }
        }
    }
    SpMat B(dofs.size(), dofs.size());
    B.setFromTriplets(tr.begin(), tr.end());
    B.makeCompressed();
    return B;
}

VecC assemble_incident_load(const Mesh& mesh, const DofMap& dofs, BoundaryTag tag, double L) {
    check_mesh(mesh);
    if (tag != BoundaryTag::face_left && tag != BoundaryTag::face_right)
        throw FemError("incident load needs face_left or face_right");
    if (!mesh.has_tag(tag)) throw FemError(std::string("assemble_incident_load: no edges tagged ") + tag_name(tag));
    const cplx I(0.0, 1.0);
    const cplx coeff = -2.0 * I / (L - I);
    const int nb = mesh.order + 1;
    const auto& q = line_quad();
    VecC g = VecC::Zero(dofs.size());
    double N[3];
    for (const auto& e : mesh.boundary_edges) {
        if (e.tag != tag) continue;
        const Vec2 a = mesh.nodes[e.nodes[0]], b = mesh.nodes[e.nodes[1]];
        const double len = (b - a).norm();
        const auto en = edge_nodes(e);
        for (std::size_t p = 0; p < q.w.size(); ++p) {
            line_shape(mesh.order, q.s[p], N);
            const double y = a.y() + q.s[p] * (b.y() - a.y());
            const double phi = transverse_mode(y);
            for (int i = 0; i < nb; ++i) {
                const int di = dofs.node_to_dof[en[i]];
                if (di >= 0) g(di) += coeff * (q.w[p] * len * phi * N[i]);
            }
        }
    }
    return g;
}

namespace {

cplx project_edges(const VecC& un, const Mesh& mesh, const std::vector<std::array<int, 3>>& edges) {
    const int nb = mesh.order + 1;
    const auto& q = line_quad();
    double N[3];
    cplx acc = 0.0;
    for (const auto& en : edges) {
        const Vec2 a = mesh.nodes[en[0]], b = mesh.nodes[en[1]];
        const double len = (b - a).norm();
        for (std::size_t p = 0; p < q.w.size(); ++p) {
            line_shape(mesh.order, q.s[p], N);
            const double y = a.y() + q.s[p] * (b.y() - a.y());
            cplx u = 0.0;
            for (int i = 0; i < nb; ++i) u += N[i] * un(en[i]);
            acc += q.w[p] * len * transverse_mode(y) * u;
        }
    }
    return acc;
}

} // namespace

cplx trace_projection(const VecC& u, const Mesh& mesh, const DofMap& dofs, BoundaryTag tag) {
    check_mesh(mesh);
    if (tag != BoundaryTag::face_left && tag != BoundaryTag::face_right)
        throw FemError("trace_projection needs a vertical face tag");
    std::vector<std::array<int, 3>> edges;
    for (const auto& e : mesh.boundary_edges)
        if (e.tag == tag) edges.push_back(edge_nodes(e));
    if (edges.empty()) throw FemError(std::string("trace_projection: no edges tagged ") + tag_name(tag));
    return project_edges(dofs.expand(u), mesh, edges);
}

cplx line_projection(const VecC& u, const Mesh& mesh, const DofMap& dofs, double x0) {
    check_mesh(mesh);
    std::set<std::pair<int, int>> seen;
    std::vector<std::array<int, 3>> edges;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        for (int le = 0; le < 3; ++le) {
            const int a = mesh.triangles[t][le], b = mesh.triangles[t][(le + 1) % 3];
            if (std::abs(mesh.nodes[a].x() - x0) > 1e-12 || std::abs(mesh.nodes[b].x() - x0) > 1e-12) continue;
            if (!seen.insert({std::min(a, b), std::max(a, b)}).second) continue;
            edges.push_back({a, b, mesh.order == 2 ? mesh.midside[t][le] : -1});
        }
    }
    if (edges.empty()) throw FemError("line_projection: x0 is not a vertical grid line");
    return project_edges(dofs.expand(u), mesh, edges);
}

double boundary_flux_energy(const VecC& u, const Mesh& mesh, const DofMap& dofs, BoundaryTag tag) {
    check_mesh(mesh);
    const VecC un = dofs.expand(u);
    const int nb = nodes_per_triangle(mesh.order);
    const auto& q = line_quad();
    double N[6], dN[6][3];
    double acc = 0.0;
    bool any = false;
    for (const auto& e : mesh.boundary_edges) {
        if (e.tag != tag) continue;
        any = true;
        const std::size_t t = static_cast<std::size_t>(e.triangle);
        std::array<Vec2, 3> gL;
        bary_gradients(mesh, t, gL);
        const auto v = element_nodes(mesh, t);
        const Vec2 a = mesh.nodes[e.nodes[0]], b = mesh.nodes[e.nodes[1]];
        const double len = (b - a).norm();
        const Vec2 n = Vec2(b.y() - a.y(), -(b.x() - a.x())) / len;
        for (std::size_t p = 0; p < q.w.size(); ++p) {
            std::array<double, 3> L{0.0, 0.0, 0.0};
            L[e.local_edge] = 1.0 - q.s[p];
            L[(e.local_edge + 1) % 3] = q.s[p];
            tri_shape(mesh.order, L, N, dN);
            cplx dn = 0.0;
            for (int i = 0; i < nb; ++i) {
                const Vec2 g = dN[i][0] * gL[0] + dN[i][1] * gL[1] + dN[i][2] * gL[2];
                dn += un(v[i]) * g.dot(n);
            }
            acc += q.w[p] * len * std::norm(dn);
        }
    }
    if (!any) throw FemError(std::string("boundary_flux_energy: no edges tagged ") + tag_name(tag));
    return acc;
}

QuasiPeriodicOperators apply_quasi_periodic(const SparseOperatorPair& ops, const Mesh& mesh, double eta) {
    if (mesh.periodic_pairs.empty()) throw FemError("apply_quasi_periodic: mesh has no periodic pairs");
    std::vector<std::pair<int, int>> dp;
    for (const auto& [l, r] : mesh.periodic_pairs) {
        const int dl = ops.dofs.node_to_dof[l], dr = ops.dofs.node_to_dof[r];
        if (dl < 0 && dr < 0) continue;
        if (dl < 0 || dr < 0) throw FemError("apply_quasi_periodic: pair mixes free and constrained nodes");
        if (std::abs(mesh.nodes[l].y() - mesh.nodes[r].y()) > 1e-12)
            throw FemError("apply_quasi_periodic: paired nodes differ in y");
        dp.emplace_back(dl, dr);
    }
    return apply_quasi_periodic(ops, dp, eta);
}

QuasiPeriodicOperators apply_quasi_periodic(const SparseOperatorPair& ops,
                                            const std::vector<std::pair<int, int>>& dof_pairs, double eta) {
    const int n = ops.n_dof;
    if (dof_pairs.empty()) throw FemError("apply_quasi_periodic: no pairs");
    std::vector<int> role(n, 0); // 1 left, 2 right
    for (const auto& [l, r] : dof_pairs) {
        if (l < 0 || r < 0 || l >= n || r >= n || l == r) throw FemError("apply_quasi_periodic: invalid pair");
        if (role[l] != 0 || role[r] != 0) throw FemError("apply_quasi_periodic: pairing is not bijective");
        role[l] = 1;
        role[r] = 2;
    }
    std::vector<int> red(n, -1);
    int nr = 0;
    for (int i = 0; i < n; ++i)
        if (role[i] != 1) red[i] = nr++;
    const cplx ph = std::polar(1.0, eta);
    std::vector<Eigen::Triplet<cplx>> tp;
    for (int i = 0; i < n; ++i)
        if (red[i] >= 0) tp.emplace_back(i, red[i], 1.0);
    for (const auto& [l, r] : dof_pairs) tp.emplace_back(l, red[r], ph);
    QuasiPeriodicOperators q;
    q.eta = eta;
    q.P.resize(n, nr);
    q.P.setFromTriplets(tp.begin(), tp.end());
    const SpMat Ph = q.P.adjoint();
    q.K = Ph * ops.K * q.P;
    q.M = Ph * ops.M * q.P;
    q.K.makeCompressed();
    q.M.makeCompressed();
    return q;
}

SparseOperatorPair interval_operators(double length, int n, int order) {
    if (n < 1 || !(length > 0)) throw FemError("interval_operators: invalid size");
    if (order != 1 && order != 2) throw FemError("element order must be 1 or 2");
    const double h = length / n;
    const int nn = order * n + 1;
    std::vector<Eigen::Triplet<cplx>> tk, tm;
    Eigen::Matrix3d ke, me;
    if (order == 1) {
        ke << 1, -1, 0, -1, 1, 0, 0, 0, 0;
        ke /= h;
        me << 2, 1, 0, 1, 2, 0, 0, 0, 0;
        me *= h / 6.0;
    } else {
        ke << 7, 1, -8, 1, 7, -8, -8, -8, 16;
        ke /= 3.0 * h;
        me << 4, -1, 2, -1, 4, 2, 2, 2, 16;
        me *= h / 30.0;
    }
    const int nb = order + 1;
    for (int e = 0; e < n; ++e) {
        const std::array<int, 3> v = order == 1 ? std::array<int, 3>{e, e + 1, -1}
                                                : std::array<int, 3>{2 * e, 2 * e + 2, 2 * e + 1};
        for (int i = 0; i < nb; ++i)
            for (int j = 0; j < nb; ++j) {
                tk.emplace_back(v[i], v[j], ke(i, j));
                tm.emplace_back(v[i], v[j], me(i, j));
            }
    }
    SparseOperatorPair ops;
    ops.n_dof = nn;
    ops.K.resize(nn, nn);
    ops.M.resize(nn, nn);
    ops.K.setFromTriplets(tk.begin(), tk.end());
    ops.M.setFromTriplets(tm.begin(), tm.end());
    ops.dofs.node_to_dof.resize(nn);
    ops.dofs.dof_to_node.resize(nn);
    for (int i = 0; i < nn; ++i) ops.dofs.node_to_dof[i] = ops.dofs.dof_to_node[i] = i;
    return ops;
}

void write_coo(std::ostream& os, const SpMat& A) {
    os << std::setprecision(17);
    for (int c = 0; c < A.outerSize(); ++c)
        for (SpMat::InnerIterator it(A, c); it; ++it)
            os << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
}

} // namespace qwg
