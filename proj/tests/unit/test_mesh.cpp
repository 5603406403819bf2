#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "qwg/mesh.hpp"

using namespace qwg;

namespace {

std::set<std::pair<long long, long long>> node_keys(const Mesh& m, double sign = 1.0) {
    std::set<std::pair<long long, long long>> out;
    for (const auto& p : m.nodes) out.insert({std::llround(sign * p.x() * 1e9), std::llround(p.y() * 1e9)});
    return out;
}

// Point on the analytic boundary of the tee (strip walls, stub sides, lid).
bool on_tee_boundary(const GeometryTee& g, const Eigen::Vector2d& p) {
    const double x = p.x(), y = p.y(), a = 0.5 * g.ell;
    if (y == -0.5 && std::abs(x) <= g.L) return true;
    if (y == 0.5 && std::abs(x) >= a && std::abs(x) <= g.L) return true;
    if (std::abs(x) == a && y >= 0.5 && y <= g.H) return true;
    if (y == g.H && std::abs(x) <= a) return true;
    return false;
}

int count_tag(const Mesh& m, BoundaryTag t) {
    return static_cast<int>(
        std::count_if(m.boundary_edges.begin(), m.boundary_edges.end(), [t](const auto& e) { return e.tag == t; }));
}

} // namespace

TEST_CASE("strip counting") {
    const auto m = build_tee_mesh(GeometryTee::strip(1.0), 0.5, 1);
    CHECK(m.num_triangles() == 16);
    CHECK(m.num_nodes() == 15);
    CHECK(count_tag(m, BoundaryTag::wall) == 8);
    CHECK(count_tag(m, BoundaryTag::face_left) == 2);
    CHECK(count_tag(m, BoundaryTag::face_right) == 2);
    CHECK_FALSE(m.has_tag(BoundaryTag::lid));
    for (const auto& e : m.boundary_edges) {
        if (e.tag != BoundaryTag::wall) continue;
        CHECK(std::abs(m.nodes[e.nodes[0]].y()) == 0.5);
        CHECK(std::abs(m.nodes[e.nodes[1]].y()) == 0.5);
    }
}

TEST_CASE("tee area, orientation and angles") {
    for (int order : {1, 2}) {
        const GeometryTee g{1.6, 2.5, 2.0, true};
        const auto m = build_tee_mesh(g, 0.1, order);
        CHECK(std::abs(m.area() - (2 * g.L + g.ell * (g.H - 0.5))) <= 1e-12);
        CHECK(std::abs(g.area() - m.area()) <= 1e-12);
        for (std::size_t t = 0; t < m.num_triangles(); ++t) CHECK(m.signed_area(t) > 0);
        CHECK(m.min_angle_deg() >= 20.0);
    }
}

TEST_CASE("boundary tags") {
    const GeometryTee g{1.3, 3.1, 2.5, true};
    const auto m = build_tee_mesh(g, 0.1, 2);
    double lid_len = 0, face_len = 0;
    for (const auto& e : m.boundary_edges) {
        const auto& a = m.nodes[e.nodes[0]];
        const auto& b = m.nodes[e.nodes[1]];
        if (e.tag == BoundaryTag::wall || e.tag == BoundaryTag::lid) {
            CHECK(on_tee_boundary(g, a));
            CHECK(on_tee_boundary(g, b));
            CHECK(on_tee_boundary(g, m.nodes[e.mid]));
        }
        if (e.tag == BoundaryTag::lid) {
            CHECK(a.y() == g.H);
            lid_len += (b - a).norm();
        }
        if (e.tag == BoundaryTag::face_right) {
            CHECK(a.x() == g.L);
            face_len += (b - a).norm();
        }
        if (e.tag == BoundaryTag::face_left) CHECK(a.x() == -g.L);
    }
    CHECK(lid_len == doctest::Approx(g.ell).epsilon(1e-12));
    CHECK(face_len == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("order 2 adds one node per edge") {
    const GeometryTee g{1.6, 2.5, 2.0, true};
    for (double h : {0.25, 0.1}) {
        const auto p1 = build_tee_mesh(g, h, 1);
        const auto p2 = build_tee_mesh(g, h, 2);
        // simply connected triangulation: V - E + F = 1
        const std::size_t edges = p1.num_nodes() + p1.num_triangles() - 1;
        CHECK(p2.num_nodes() == p1.num_nodes() + edges);
        CHECK(p2.num_triangles() == p1.num_triangles());
        for (std::size_t t = 0; t < p2.num_triangles(); ++t)
            for (int i = 0; i < 3; ++i) {
                const auto& a = p2.nodes[p2.triangles[t][i]];
                const auto& b = p2.nodes[p2.triangles[t][(i + 1) % 3]];
                CHECK((p2.nodes[p2.midside[t][i]] - 0.5 * (a + b)).norm() < 1e-14);
            }
    }
}

TEST_CASE("refinement nesting") {
    const GeometryTee g{1.6, 2.5, 2.0, true};
    const auto a = build_tee_mesh(g, 0.1, 1);
    const auto b = build_tee_mesh(g, 0.05, 1);
    CHECK(b.num_triangles() == 4 * a.num_triangles());
    const auto ka = node_keys(a);
    const auto kb = node_keys(b);
    CHECK(std::includes(kb.begin(), kb.end(), ka.begin(), ka.end()));
}

TEST_CASE("half mesh") {
    const GeometryTee g{1.6, 2.5, 2.0, true};
    const auto full = build_tee_mesh(g, 0.1, 2);
    const auto half = build_half_mesh(g, 0.1, 2);
    CHECK(half.area() == doctest::Approx(0.5 * full.area()).epsilon(1e-12));
    CHECK_FALSE(half.has_tag(BoundaryTag::face_right));

    double ymin = 1e9, ymax = -1e9, len = 0;
    for (const auto& e : half.boundary_edges) {
        if (e.tag != BoundaryTag::symmetry_plane) continue;
        for (int n : e.nodes) {
            CHECK(half.nodes[n].x() == 0.0);
            ymin = std::min(ymin, half.nodes[n].y());
            ymax = std::max(ymax, half.nodes[n].y());
        }
        len += (half.nodes[e.nodes[1]] - half.nodes[e.nodes[0]]).norm();
    }
    CHECK(ymin == -0.5);
    CHECK(ymax == g.H);
    CHECK(len == doctest::Approx(g.H + 0.5).epsilon(1e-12));

    auto keys = node_keys(half);
    const auto mirrored = node_keys(half, -1.0);
    keys.insert(mirrored.begin(), mirrored.end());
    CHECK(keys == node_keys(full));
}

TEST_CASE("cell mesh pairing") {
    const auto strip = build_cell_mesh(GeometryTee::strip(1.0), 0.1, 0.1, 2);
    CHECK(strip.area() == doctest::Approx(10.0).epsilon(1e-12));
    double xmin = 1e9, xmax = -1e9;
    for (const auto& p : strip.nodes) {
        xmin = std::min(xmin, p.x());
        xmax = std::max(xmax, p.x());
    }
    CHECK(xmin == -5.0);
    CHECK(xmax == 5.0);

    for (const auto& m : {strip, build_cell_mesh(GeometryTee{1.6, 2.5, 2.0, true}, 0.1, 0.1, 2)}) {
        const auto left = m.nodes_with_tag(BoundaryTag::face_left);
        const auto right = m.nodes_with_tag(BoundaryTag::face_right);
        CHECK(m.periodic_pairs.size() == left.size());
        CHECK(left.size() == right.size());
        std::set<int> ls, rs;
        double prev_y = -1e9;
        for (auto [l, r] : m.periodic_pairs) {
            ls.insert(l);
            rs.insert(r);
            CHECK(std::abs(m.nodes[l].y() - m.nodes[r].y()) <= 1e-12);
            CHECK(m.nodes[l].y() > prev_y);
            prev_y = m.nodes[l].y();
        }
        CHECK(ls == std::set<int>(left.begin(), left.end()));
        CHECK(rs == std::set<int>(right.begin(), right.end()));
    }
}

TEST_CASE("separate lid row") {
    const GeometryTee g{1.6, 2.5, 2.0, true};
    const auto uniform = build_tee_mesh(g, 0.1, 2);
    MeshLayout layout;
    layout.stub_rows = 19;
    layout.lid_row_base = 2.4;
    const auto split = build_tee_mesh(g, 0.1, 2, layout);
    CHECK(split.num_nodes() == uniform.num_nodes());
    CHECK(split.num_triangles() == uniform.num_triangles());
    CHECK(node_keys(split) == node_keys(uniform));

    GeometryTee taller = g;
    taller.H = 2.5004;
    const auto moved = build_tee_mesh(taller, 0.1, 2, layout);
    REQUIRE(moved.num_nodes() == split.num_nodes());
    // only nodes strictly above the base move
    for (std::size_t i = 0; i < split.num_nodes(); ++i) {
        if (split.nodes[i].y() <= 2.4 + 1e-12) CHECK(moved.nodes[i] == split.nodes[i]);
        else CHECK(moved.nodes[i].y() > split.nodes[i].y());
    }
    CHECK(moved.area() == doctest::Approx(taller.area()).epsilon(1e-12));
}

TEST_CASE("rectangle mesh") {
    const auto m = build_rectangle_mesh(0.0, 1.0, 0.0, 1.0, 0.25, 2);
    CHECK(m.area() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.num_triangles() == 32);
    for (const auto& e : m.boundary_edges) CHECK(e.tag == BoundaryTag::wall);
}

TEST_CASE("write and read") {
    const auto m = build_tee_mesh(GeometryTee{1.6, 2.0, 1.5, true}, 0.25, 2);
    std::stringstream ss;
    m.write(ss);
    const auto r = Mesh::read(ss);
    CHECK(r.order == 2);
    REQUIRE(r.num_nodes() == m.num_nodes());
    for (std::size_t i = 0; i < m.num_nodes(); ++i) CHECK(r.nodes[i] == m.nodes[i]);
    CHECK(r.triangles == m.triangles);
    CHECK(r.midside == m.midside);
    REQUIRE(r.boundary_edges.size() == m.boundary_edges.size());
    for (std::size_t i = 0; i < m.boundary_edges.size(); ++i) {
        CHECK(r.boundary_edges[i].nodes == m.boundary_edges[i].nodes);
        CHECK(r.boundary_edges[i].tag == m.boundary_edges[i].tag);
    }
    std::stringstream bad("qwg-mesh 7\n");
    CHECK_THROWS_AS(Mesh::read(bad), MeshError);
}

TEST_CASE("geometry validation") {
    CHECK_THROWS_AS(build_tee_mesh(GeometryTee{0.9, 2.5, 2.0, true}, 0.1, 2), MeshError);
    CHECK_THROWS_AS(build_tee_mesh(GeometryTee{2.0, 2.5, 2.0, true}, 0.1, 2), MeshError);
    CHECK_THROWS_AS(build_tee_mesh(GeometryTee{1.6, 1.0, 2.0, true}, 0.1, 2), MeshError);
    CHECK_THROWS_AS(build_tee_mesh(GeometryTee{1.6, 2.5, 0.7, true}, 0.1, 2), MeshError);
    CHECK_THROWS_AS(build_tee_mesh(GeometryTee{1.6, 2.5, 2.0, true}, 0.1, 3), MeshError);
    CHECK_THROWS_AS(build_cell_mesh(GeometryTee{1.6, 2.5, 2.0, true}, 0.7, 0.1, 2), MeshError);
    CHECK_THROWS_AS(tag_from_name("roof"), MeshError);
    CHECK(tag_from_name(tag_name(BoundaryTag::symmetry_plane)) == BoundaryTag::symmetry_plane);
}
