#include "doctest.h"

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qwg/fem.hpp"

using namespace qwg;

namespace {

constexpr double pi = std::numbers::pi;

Mesh single_triangle(Eigen::Vector2d a, Eigen::Vector2d b, Eigen::Vector2d c) {
    Mesh m;
    m.order = 1;
    m.nodes = {a, b, c};
    m.triangles = {{0, 1, 2}};
    return m;
}

VecC interpolate(const Mesh& m, const DofMap& d, const std::function<cplx(double, double)>& f) {
    VecC u(m.num_nodes());
    for (std::size_t i = 0; i < m.num_nodes(); ++i) u(i) = f(m.nodes[i].x(), m.nodes[i].y());
    return d.restrict(u);
}

Eigen::MatrixXcd dense(const SpMat& A) { return Eigen::MatrixXcd(A); }

double fitted_rate(const std::vector<double>& h, const std::vector<double>& err) {
    const int n = static_cast<int>(h.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = std::log(h[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

TEST_CASE("P1 element matrices on the unit right triangle") {
    const auto m = single_triangle({0, 0}, {1, 0}, {0, 1});
    const auto ops = assemble(m, {});
    Eigen::Matrix3d k;
    k << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
    Eigen::Matrix3d mm;
    mm << 2, 1, 1, 1, 2, 1, 1, 1, 2;
    mm *= 0.5 / 12.0;
    CHECK((dense(ops.K).real() - k).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((dense(ops.M).real() - mm).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(dense(ops.K).imag().norm() == 0.0);
}

TEST_CASE("element mass scales with area") {
    const auto m = single_triangle({0.2, -0.1}, {1.7, 0.3}, {0.4, 1.1});
    const double area = m.signed_area(0);
    const auto ops = assemble(m, {});
    Eigen::Matrix3d mm;
    mm << 2, 1, 1, 1, 2, 1, 1, 1, 2;
    CHECK((dense(ops.M).real() - (area / 12.0) * mm).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("constants lie in the kernel of the Neumann stiffness") {
    for (int order : {1, 2}) {
        const auto m = build_tee_mesh(GeometryTee{1.6, 2.5, 2.0, true}, 0.2, order);
        const auto ops = assemble(m, {});
        const VecC ones = VecC::Ones(ops.n_dof);
        CHECK((ops.K * ones).cwiseAbs().maxCoeff() < 1e-12);
        // total mass equals the area
        CHECK((ones.transpose() * ops.M * ones)(0).real() == doctest::Approx(m.area()).epsilon(1e-12));
    }
}

TEST_CASE("assembled operators are Hermitian") {
    const auto m = build_tee_mesh(GeometryTee{1.6, 2.5, 2.0, true}, 0.1, 2);
    const auto ops = assemble(m);
    CHECK(hermitian_defect(ops.K) <= 1e-14 * max_abs_entry(ops.K));
    CHECK(hermitian_defect(ops.M) <= 1e-14 * max_abs_entry(ops.M));
    CHECK(ops.n_dof == ops.dofs.size());
    for (int n : m.nodes_with_tag(BoundaryTag::wall)) CHECK(ops.dofs.node_to_dof[n] == -1);
    for (int n : m.nodes_with_tag(BoundaryTag::lid)) CHECK(ops.dofs.node_to_dof[n] == -1);
}

TEST_CASE("Robin face operator") {
    Mesh m = single_triangle({0, 0}, {1, 0}, {1, 1});
    m.boundary_edges.push_back({{1, 2}, -1, BoundaryTag::face_right, 0, 1});
    const auto d = DofMap::build(m, {});
    const cplx c(0.4, 0.2);
    const auto B = dense(assemble_robin(m, d, BoundaryTag::face_right, c));
    Eigen::Matrix2cd expect;
    expect << 2.0, 1.0, 1.0, 2.0;
    expect *= c / 6.0;
    CHECK((B.block(1, 1, 2, 2) - expect).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(B.row(0).norm() == 0.0);
    CHECK(B.col(0).norm() == 0.0);
    CHECK(dense(assemble_robin(m, d, BoundaryTag::face_right, 0.0)).norm() == 0.0);
    CHECK_THROWS_AS(assemble_robin(m, d, BoundaryTag::face_left, c), FemError);
}

TEST_CASE("Robin operator lives on face unknowns") {
    const auto m = build_tee_mesh(GeometryTee{1.6, 2.5, 2.0, true}, 0.1, 2);
    const auto d = DofMap::build(m, default_dirichlet_tags());
    const auto B = assemble_robin(m, d, BoundaryTag::face_left, cplx(1.0, 0.0));
    std::vector<char> on_face(d.size(), 0);
    for (int n : m.nodes_with_tag(BoundaryTag::face_left))
        if (d.node_to_dof[n] >= 0) on_face[d.node_to_dof[n]] = 1;
    for (int c = 0; c < B.outerSize(); ++c)
        for (SpMat::InnerIterator it(B, c); it; ++it) {
            CHECK(on_face[it.row()]);
            CHECK(on_face[it.col()]);
        }
    CHECK(hermitian_defect(B) <= 1e-15 * max_abs_entry(B));
}

TEST_CASE("incident load") {
    const double L = 2.0;
    const cplx I(0, 1);
    const cplx coeff = -2.0 * I / (L - I);
    CHECK(std::abs(coeff - cplx(0.4, -0.8)) < 1e-15);

    const auto m = build_tee_mesh(GeometryTee::strip(L), 0.02, 2);
    const auto d = DofMap::build(m, default_dirichlet_tags());
    const VecC g = assemble_incident_load(m, d, BoundaryTag::face_right, L);
    const VecC phi = interpolate(m, d, [](double, double y) { return transverse_mode(y); });
    const VecC odd = interpolate(m, d, [](double, double y) { return std::sqrt(2.0) * std::sin(2 * pi * y); });
    CHECK(std::abs(phi.dot(g) - coeff) < 5e-8);
    CHECK(std::abs(odd.dot(g)) < 1e-12);
    const VecC gl = assemble_incident_load(m, d, BoundaryTag::face_left, L);
    CHECK(std::abs(phi.dot(gl) - coeff) < 5e-8);
    CHECK(std::abs(gl.dot(g)) < 1e-15);
    CHECK_THROWS_AS(assemble_incident_load(m, d, BoundaryTag::wall, L), FemError);
}

TEST_CASE("trace projection") {
    const auto m = build_tee_mesh(GeometryTee::strip(1.0), 0.02, 2);
    const auto d = DofMap::build(m, {});
    const VecC phi = interpolate(m, d, [](double, double y) { return transverse_mode(y); });
    CHECK(std::abs(trace_projection(phi, m, d, BoundaryTag::face_left) - 1.0) < 5e-8);
    const VecC one = VecC::Ones(d.size());
    CHECK(std::abs(trace_projection(one, m, d, BoundaryTag::face_right) - 2.0 * std::sqrt(2.0) / pi) < 1e-12);
    CHECK(std::abs(trace_projection(VecC::Zero(d.size()), m, d, BoundaryTag::face_right)) == 0.0);
    CHECK(std::abs(line_projection(one, m, d, 0.3) - 2.0 * std::sqrt(2.0) / pi) < 1e-12);
    CHECK_THROWS_AS(trace_projection(one, m, d, BoundaryTag::wall), FemError);
    CHECK_THROWS_AS(line_projection(one, m, d, 0.3333), FemError);
}

TEST_CASE("trace projection error is interpolation-limited") {
    std::vector<double> hs, errs;
    for (double h : {0.1, 0.05, 0.025}) {
        const auto m = build_tee_mesh(GeometryTee::strip(1.0), h, 2);
        const auto d = DofMap::build(m, {});
        const VecC phi = interpolate(m, d, [](double, double y) { return transverse_mode(y); });
        hs.push_back(h);
        errs.push_back(std::abs(trace_projection(phi, m, d, BoundaryTag::face_left) - 1.0));
    }
    CHECK(fitted_rate(hs, errs) == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("lid flux energy of an exact quadratic") {
    const GeometryTee g{1.6, 2.5, 2.0, true};
    const auto m = build_tee_mesh(g, 0.1, 2);
    const auto d = DofMap::build(m, {});
    const VecC u = interpolate(m, d, [&](double x, double y) { return (y - g.H) * (1.0 + x); });
    const double a = 0.5 * g.ell;
    const double exact = 2 * a + (2 * a * a * a) / 3.0;
    CHECK(boundary_flux_energy(u, m, d, BoundaryTag::lid) == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("quasi-periodic reduction") {
    const auto m = build_cell_mesh(GeometryTee{1.6, 2.5, 2.0, true}, 0.2, 0.25, 2);
    const auto ops = assemble(m);
    const double eta = 1.1;
    const auto q = apply_quasi_periodic(ops, m, eta);
    const auto qc = apply_quasi_periodic(ops, m, 2 * pi - eta);
    CHECK(hermitian_defect(q.K) <= 1e-13 * max_abs_entry(q.K));
    CHECK(hermitian_defect(q.M) <= 1e-13 * max_abs_entry(q.M));
    CHECK((dense(q.K) - dense(qc.K).conjugate()).cwiseAbs().maxCoeff() <= 1e-13 * max_abs_entry(q.K));

    // unit-modulus prolongation entries
    for (int c = 0; c < q.P.outerSize(); ++c)
        for (SpMat::InnerIterator it(q.P, c); it; ++it) CHECK(std::abs(std::abs(it.value()) - 1.0) < 1e-15);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> mass(dense(q.M));
    CHECK(mass.eigenvalues().minCoeff() > 0);

    const auto a = dense_eigenpairs(q.K, q.M, 6);
    const auto b = dense_eigenpairs(qc.K, qc.M, 6);
    for (int j = 0; j < 6; ++j) CHECK(a.values[j] == doctest::Approx(b.values[j]).epsilon(1e-10));

    // eta = 0: real symmetric pencil
    const auto q0 = apply_quasi_periodic(ops, m, 0.0);
    CHECK(dense(q0.K).imag().cwiseAbs().maxCoeff() == 0.0);
    CHECK(dense(q0.M).imag().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("quasi-periodic pairing errors") {
    const auto ops = interval_operators(1.0, 4, 1);
    CHECK_THROWS_AS(apply_quasi_periodic(ops, std::vector<std::pair<int, int>>{}, 0.0), FemError);
    CHECK_THROWS_AS(apply_quasi_periodic(ops, {{0, 4}, {0, 3}}, 0.0), FemError);
    CHECK_THROWS_AS(apply_quasi_periodic(ops, {{0, 0}}, 0.0), FemError);
    CHECK_THROWS_AS(apply_quasi_periodic(ops, {{0, 9}}, 0.0), FemError);
    const auto strip = build_tee_mesh(GeometryTee::strip(1.0), 0.25, 1);
    CHECK_THROWS_AS(apply_quasi_periodic(assemble(strip), strip, 0.0), FemError);
}

TEST_CASE("1D quasi-periodic eigenvalues converge at nominal rates") {
    const double eta = 1.0;
    const std::array<double, 3> exact{eta * eta, (eta - 2 * pi) * (eta - 2 * pi), (eta + 2 * pi) * (eta + 2 * pi)};
    for (int order : {1, 2}) {
        std::vector<double> hs, errs;
        for (int n : {8, 16, 32}) {
            const auto ops = interval_operators(1.0, n, order);
            const int last = ops.n_dof - 1;
            const auto q = apply_quasi_periodic(ops, {{0, last}}, eta);
            const auto r = dense_eigenpairs(q.K, q.M, 3);
            for (int j = 0; j < 3; ++j) CHECK(r.values[j] > exact[j] - 1e-12);
            hs.push_back(1.0 / n);
            errs.push_back(std::abs(r.values[1] - exact[1]));
        }
        CHECK(std::abs(fitted_rate(hs, errs) - 2.0 * order) <= 0.2 * 2.0 * order);
    }
}

TEST_CASE("unit square Dirichlet eigenvalue converges at nominal rates") {
    for (int order : {1, 2}) {
        std::vector<double> hs, errs;
        for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
            const auto m = build_rectangle_mesh(0.0, 1.0, 0.0, 1.0, h, order);
            const auto ops = assemble(m);
            EigenOptions o;
            o.dense_limit = 0;
            const auto r = smallest_eigenpairs(ops.K, ops.M, 1, o);
            hs.push_back(h);
            errs.push_back(r.values[0] - 2 * pi * pi);
            CHECK(errs.back() > 0);
        }
        CHECK(std::abs(fitted_rate(hs, errs) - 2.0 * order) <= 0.2 * 2.0 * order);
    }
}

TEST_CASE("coordinate export") {
    SpMat A(2, 2);
    A.insert(0, 1) = cplx(1.5, -2.0);
    A.insert(1, 0) = cplx(0.25, 0.0);
    A.makeCompressed();
    std::ostringstream os;
    write_coo(os, A);
    CHECK(os.str() == "1 0 0.25 0\n0 1 1.5 -2\n");
}

TEST_CASE("dof map round trip and errors") {
    const auto m = build_tee_mesh(GeometryTee{1.6, 2.5, 2.0, true}, 0.25, 2);
    const auto d = DofMap::build(m, default_dirichlet_tags());
    VecC u = VecC::LinSpaced(d.size(), 1.0, 2.0);
    CHECK((d.restrict(d.expand(u)) - u).norm() == 0.0);
    CHECK_THROWS_AS(d.expand(VecC::Zero(3)), FemError);
    Mesh bad = m;
    bad.midside.clear();
    CHECK_THROWS_AS(assemble(bad), FemError);
}
