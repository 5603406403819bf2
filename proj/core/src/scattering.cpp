#include "qwg/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qwg/parallel.hpp"

namespace qwg {

namespace {

constexpr double pi = std::numbers::pi;
const cplx I(0.0, 1.0);

double wrap_pm_pi(double a) {
    a = std::remainder(a, 2.0 * pi);
    if (a <= -pi) a += 2.0 * pi;
    return a;
}

double wrap_0_2pi(double a) {
    a = std::fmod(a, 2.0 * pi);
    if (a < 0) a += 2.0 * pi;
    if (a >= 2.0 * pi) a -= 2.0 * pi;
    return a;
}

cplx reflection_from_trace(cplx c, double L) { return (c - (L + I)) / (L - I); }

int stub_rows_for(double H, double h) { return std::max(1, static_cast<int>(std::lround((H - 0.5) / h))); }

} // namespace

Eigen::Matrix2cd ThresholdScatteringMatrix::matrix() const {
    Eigen::Matrix2cd S;
    S << s_pp, s_pm, s_mp, s_mm;
    return S;
}

ThresholdScatteringMatrix ThresholdScatteringMatrix::from_matrix(const Eigen::Matrix2cd& S) {
    ThresholdScatteringMatrix t;
    t.s_pp = S(0, 0);
    t.s_pm = S(0, 1);
    t.s_mp = S(1, 0);
    t.s_mm = S(1, 1);
    t.unitarity_residual = (S * S.adjoint() - Eigen::Matrix2cd::Identity()).norm();
    t.symmetry_residual = std::abs(t.s_pm - t.s_mp);
    return t;
}

ScatteringSolution solve_scattering(const GeometryTee& g, const MeshParams& mp, const MeshLayout& layout) {
    g.validate();
    ScatteringSolution sol;
    sol.mesh = build_tee_mesh(g, mp.h, mp.order, layout);
    SparseOperatorPair ops = assemble(sol.mesh);
    sol.dofs = ops.dofs;
    const cplx robin = 1.0 / (g.L - I);
    SpMat A = ops.K - (pi * pi) * ops.M - assemble_robin(sol.mesh, sol.dofs, BoundaryTag::face_left, robin) -
              assemble_robin(sol.mesh, sol.dofs, BoundaryTag::face_right, robin);
    MatC rhs(sol.dofs.size(), 2);
    rhs.col(0) = assemble_incident_load(sol.mesh, sol.dofs, BoundaryTag::face_right, g.L);
    rhs.col(1) = assemble_incident_load(sol.mesh, sol.dofs, BoundaryTag::face_left, g.L);
    LinearSolver lu(A);
    const MatC X = lu.solve(rhs);
    const double res = (A * X - rhs).norm() / rhs.norm();
    if (!(res <= 1e-10)) throw ScatteringError("scattering solve residual " + std::to_string(res));
    sol.v_plus = X.col(0);
    sol.v_minus = X.col(1);
    const double L = g.L;
    Eigen::Matrix2cd S;
    S(0, 0) = reflection_from_trace(trace_projection(sol.v_plus, sol.mesh, sol.dofs, BoundaryTag::face_right), L);
    S(0, 1) = trace_projection(sol.v_plus, sol.mesh, sol.dofs, BoundaryTag::face_left) / (L - I);
    S(1, 1) = reflection_from_trace(trace_projection(sol.v_minus, sol.mesh, sol.dofs, BoundaryTag::face_left), L);
    S(1, 0) = trace_projection(sol.v_minus, sol.mesh, sol.dofs, BoundaryTag::face_right) / (L - I);
    sol.S = ThresholdScatteringMatrix::from_matrix(S);
    return sol;
}

ThresholdScatteringMatrix threshold_scattering_matrix(const GeometryTee& g, const MeshParams& mp) {
    return solve_scattering(g, mp).S;
}

Eigenphases eigenphases(const ThresholdScatteringMatrix& S) {
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(S.matrix());
    Eigenphases e;
    std::array<double, 2> ph{};
    std::array<Eigen::Vector2d, 2> vec;
    for (int k = 0; k < 2; ++k) {
        const cplx tau = es.eigenvalues()(k);
        ph[k] = wrap_0_2pi(std::arg(tau));
        Eigen::Vector2cd v = es.eigenvectors().col(k);
        const int j = std::abs(v(0)) >= std::abs(v(1)) ? 0 : 1;
        v *= std::conj(v(j)) / std::abs(v(j));
        v /= v.norm();
        e.vector_imag_residual = std::max(e.vector_imag_residual, v.imag().cwiseAbs().maxCoeff());
        vec[k] = v.real().normalized();
        e.modulus_deviation = std::max(e.modulus_deviation, std::abs(std::abs(tau) - 1.0));
    }
    const int first = ph[0] <= ph[1] ? 0 : 1;
    e.phase1 = ph[first];
    e.phase2 = ph[1 - first];
    e.values << es.eigenvalues()(first), es.eigenvalues()(1 - first);
    e.vectors.col(0) = vec[first];
    e.vectors.col(1) = vec[1 - first];
    return e;
}

int classify_X_dagger(const ThresholdScatteringMatrix& S, double tol_eig) {
    const auto e = eigenphases(S);
    int n = 0;
    for (int k = 0; k < 2; ++k)
        if (std::abs(e.values(k) + 1.0) <= tol_eig) ++n;
    return n;
}

double theta_from_S(const ThresholdScatteringMatrix& S, double tol_eig) {
    const auto e = eigenphases(S);
    const int k = std::abs(e.values(0) + 1.0) <= std::abs(e.values(1) + 1.0) ? 0 : 1;
    if (std::abs(e.values(k) + 1.0) > tol_eig) throw ScatteringError("theta_from_S: no eigenvalue near -1");
    double th = std::atan2(e.vectors(1, k), e.vectors(0, k));
    if (th < 0) th += pi;
    if (th >= pi) th -= pi;
    return th;
}

PolarizationResult polarization_matrix(const ThresholdScatteringMatrix& S, double tol_eig) {
    const auto e = eigenphases(S);
    for (int k = 0; k < 2; ++k)
        if (std::abs(e.values(k) + 1.0) <= tol_eig)
            throw ScatteringError("polarization_matrix: S has an eigenvalue near -1 (threshold resonance)");
    const Eigen::Matrix2cd Id = Eigen::Matrix2cd::Identity();
    const Eigen::Matrix2cd Sm = S.matrix();
    const Eigen::Matrix2cd C = I * (Id + Sm).inverse() * (Id - Sm);
    PolarizationResult r;
    r.M = C.real();
    r.imag_residual = C.imag().cwiseAbs().maxCoeff();
    r.symmetry_residual = std::abs(C(0, 1) - C(1, 0));
    return r;
}

HalfReflections half_domain_reflections(const GeometryTee& g, const MeshParams& mp) {
    g.validate();
    if (!g.with_stub) throw ScatteringError("half_domain_reflections needs the tee geometry");
    const Mesh mesh = build_half_mesh(g, mp.h, mp.order);
    const cplx robin = 1.0 / (g.L - I);
    auto solve = [&](const std::vector<BoundaryTag>& dir) {
        SparseOperatorPair ops = assemble(mesh, dir);
        SpMat A = ops.K - (pi * pi) * ops.M - assemble_robin(mesh, ops.dofs, BoundaryTag::face_left, robin);
        const VecC b = assemble_incident_load(mesh, ops.dofs, BoundaryTag::face_left, g.L);
        const VecC u = solve_linear(A, b);
        return reflection_from_trace(trace_projection(u, mesh, ops.dofs, BoundaryTag::face_left), g.L);
    };
    HalfReflections r;
    r.r_D = solve({BoundaryTag::wall, BoundaryTag::lid, BoundaryTag::symmetry_plane});
    r.r_N = solve({BoundaryTag::wall, BoundaryTag::lid});
    return r;
}

namespace {

// Eigenvalue of S whose eigenvector is closest to `ref`.
std::pair<cplx, Eigen::Vector2d> branch_eigen(const ThresholdScatteringMatrix& S, const Eigen::Vector2d& ref) {
    const auto e = eigenphases(S);
    const double o0 = std::abs(e.vectors.col(0).dot(ref));
    const double o1 = std::abs(e.vectors.col(1).dot(ref));
    const int k = o0 >= o1 ? 0 : 1;
    Eigen::Vector2d v = e.vectors.col(k);
    if (v.dot(ref) < 0) v = -v;
    return {e.values(k), v};
}

} // namespace

namespace {

struct Branches {
    std::vector<double> phase1, phase2;
    std::vector<Eigen::Vector2d> b1, b2;
    bool ambiguous = false;
};

// Follows both eigenvalues along the ordered samples. Eigenvector overlap
// decides when it is conclusive; otherwise the nearest continuation in phase.
Branches assign_branches(const std::vector<ThresholdScatteringMatrix>& mats) {
    Branches br;
    const std::size_t n = mats.size();
    br.phase1.resize(n);
    br.phase2.resize(n);
    br.b1.resize(n);
    br.b2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto e = eigenphases(mats[i]);
        const double pa = e.phase1, pb = e.phase2;
        Eigen::Vector2d va = e.vectors.col(0), vb = e.vectors.col(1);
        if (i == 0) {
            br.phase1[0] = pa;
            br.phase2[0] = pb;
            br.b1[0] = va;
            br.b2[0] = vb;
            continue;
        }
        const double p1 = br.phase1[i - 1], p2 = br.phase2[i - 1];
        if (std::abs(wrap_pm_pi(pa - pb)) < 0.05 || std::abs(wrap_pm_pi(p1 - p2)) < 0.05) br.ambiguous = true;
        const double keep_o = std::abs(va.dot(br.b1[i - 1])) + std::abs(vb.dot(br.b2[i - 1]));
        const double cross_o = std::abs(vb.dot(br.b1[i - 1])) + std::abs(va.dot(br.b2[i - 1]));
        bool swap;
        if (std::abs(keep_o - cross_o) > 0.2) {
            swap = cross_o > keep_o;
        } else {
            const double keep = std::abs(wrap_pm_pi(pa - p1)) + std::abs(wrap_pm_pi(pb - p2));
            const double cross = std::abs(wrap_pm_pi(pb - p1)) + std::abs(wrap_pm_pi(pa - p2));
            swap = cross < keep;
        }
        const double q1 = swap ? pb : pa, q2 = swap ? pa : pb;
        Eigen::Vector2d w1 = swap ? vb : va, w2 = swap ? va : vb;
        if (w1.dot(br.b1[i - 1]) < 0) w1 = -w1;
        if (w2.dot(br.b2[i - 1]) < 0) w2 = -w2;
        br.b1[i] = w1;
        br.b2[i] = w2;
        br.phase1[i] = p1 + wrap_pm_pi(q1 - p1);
        br.phase2[i] = p2 + wrap_pm_pi(q2 - p2);
    }
    return br;
}

} // namespace

EigenphaseTrack track_over_H(double ell, double H0, double H1, int n_samples, const TrackOptions& opt) {
    if (n_samples < 2 || !(H1 > H0)) throw ScatteringError("track_over_H: need n_samples >= 2 and H1 > H0");
    auto geom_at = [&](double H) {
        GeometryTee g;
        g.ell = ell;
        g.H = H;
        g.L = opt.L;
        g.validate();
        return g;
    };
    std::vector<double> grid;
    for (int i = 0; i < n_samples; ++i) grid.push_back(H0 + (H1 - H0) * i / (n_samples - 1));
    grid.back() = H1;
    for (double H : grid) geom_at(H);

    std::vector<double> Hs;
    std::vector<ThresholdScatteringMatrix> mats;
    auto add_samples = [&](const std::vector<double>& extra) {
        std::vector<ThresholdScatteringMatrix> m(extra.size());
        parallel_for(extra.size(), [&](std::size_t i) {
            m[i] = threshold_scattering_matrix(geom_at(extra[i]), opt.mesh);
        });
        for (std::size_t i = 0; i < extra.size(); ++i) {
            const auto it = std::lower_bound(Hs.begin(), Hs.end(), extra[i]);
            const auto k = it - Hs.begin();
            Hs.insert(it, extra[i]);
            mats.insert(mats.begin() + k, m[i]);
        }
    };
    add_samples(grid);

    // Insert midpoints wherever the phase moves too far between neighbours.
    const double min_width = (H1 - H0) / (n_samples - 1) / 256.0;
    Branches br = assign_branches(mats);
    for (int round = 0; round < opt.max_refinements; ++round) {
        std::vector<double> extra;
        for (std::size_t i = 0; i + 1 < Hs.size(); ++i) {
            const double jump = std::max(std::abs(br.phase1[i + 1] - br.phase1[i]),
                                         std::abs(br.phase2[i + 1] - br.phase2[i]));
            if (jump > opt.max_step && Hs[i + 1] - Hs[i] > min_width) extra.push_back(0.5 * (Hs[i] + Hs[i + 1]));
        }
        if (extra.empty()) break;
        add_samples(extra);
        br = assign_branches(mats);
    }

    EigenphaseTrack tr;
    tr.H_grid = Hs;
    tr.matrices = mats;
    tr.phase1 = br.phase1;
    tr.phase2 = br.phase2;
    tr.ambiguous = br.ambiguous;
    const std::size_t n = Hs.size();
    for (std::size_t i = 0; i < n; ++i) tr.unitarity_residual.push_back(mats[i].unitarity_residual);
    for (std::size_t i = 0; i + 1 < n; ++i)
        tr.max_jump = std::max({tr.max_jump, std::abs(tr.phase1[i + 1] - tr.phase1[i]),
                                std::abs(tr.phase2[i + 1] - tr.phase2[i])});

    std::vector<std::pair<double, int>> found;
    for (int branch = 1; branch <= 2; ++branch) {
        const auto& ph = branch == 1 ? tr.phase1 : tr.phase2;
        const auto& bv = branch == 1 ? br.b1 : br.b2;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double k0 = std::floor((ph[i] - pi) / (2 * pi));
            const double k1 = std::floor((ph[i + 1] - pi) / (2 * pi));
            if (k0 == k1) continue;
            const double level = pi + 2 * pi * std::max(k0, k1);
            double Hc = Hs[i] + (Hs[i + 1] - Hs[i]) * (level - ph[i]) / (ph[i + 1] - ph[i]);
            const double da = wrap_pm_pi(ph[i] - pi), db = wrap_pm_pi(ph[i + 1] - pi);
            if (opt.refine_crossings && (da <= 0) != (db <= 0)) {
                const Eigen::Vector2d ref = bv[i];
                auto delta = [&](double H) {
                    if (H == Hs[i]) return da;
                    if (H == Hs[i + 1]) return db;
                    const auto be = branch_eigen(threshold_scattering_matrix(geom_at(H), opt.mesh), ref);
                    return wrap_pm_pi(std::arg(be.first) - pi);
                };
                Hc = find_root(delta, Hs[i], Hs[i + 1], opt.crossing_tol);
            }
            found.emplace_back(Hc, branch);
        }
    }
    std::sort(found.begin(), found.end());
    for (const auto& [H, b] : found) {
        tr.crossings.push_back(H);
        tr.crossing_branch.push_back(b);
    }
    return tr;
}

RotationRate rotation_rate_check(const GeometryTee& g, double dH, const MeshParams& mp, int branch) {
    g.validate();
    if (!g.with_stub) throw ScatteringError("rotation_rate_check needs the tee geometry");
    if (!(dH > 0)) throw ScatteringError("rotation_rate_check: dH must be positive");
    // Only the row touching the lid deforms, so the difference quotient sees the field near the lid.
    const int rows = stub_rows_for(g.H, mp.h);
    MeshLayout layout;
    if (rows > 1) {
        layout.stub_rows = rows - 1;
        layout.lid_row_base = 0.5 + (g.H - 0.5) * (rows - 1) / rows;
        if (dH >= g.H - layout.lid_row_base) throw ScatteringError("rotation_rate_check: dH exceeds the lid row");
    } else {
        layout.stub_rows = 1;
    }
    const Eigen::Vector2d ref =
        branch == 0 ? Eigen::Vector2d(1.0, 1.0).normalized() : Eigen::Vector2d(1.0, -1.0).normalized();

    GeometryTee gm = g, gp = g;
    gm.H -= dH;
    gp.H += dH;
    const ScatteringSolution s0 = solve_scattering(g, mp, layout);
    const auto [tau0, b] = branch_eigen(s0.S, ref);
    const auto tm = branch_eigen(solve_scattering(gm, mp, layout).S, b).first;
    const auto tp = branch_eigen(solve_scattering(gp, mp, layout).S, b).first;

    RotationRate r;
    r.phase = wrap_0_2pi(std::arg(tau0));
    r.numeric_rate = wrap_pm_pi(std::arg(tp) - std::arg(tm)) / (2.0 * dH);
    const VecC v = b(0) * s0.v_plus + b(1) * s0.v_minus;
    r.formula_rate = 0.5 * boundary_flux_energy(v, s0.mesh, s0.dofs, BoundaryTag::lid);
    r.relative_gap = std::abs(r.numeric_rate - r.formula_rate) / std::abs(r.formula_rate);
    return r;
}

} // namespace qwg
