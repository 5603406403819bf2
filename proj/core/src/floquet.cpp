#include "qwg/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "qwg/fem.hpp"
#include "qwg/parallel.hpp"

namespace qwg {

namespace {
constexpr double pi = std::numbers::pi;
}

std::vector<double> default_eta_grid(int n) {
    if (n < 2) throw FloquetError("eta grid needs at least two points");
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(2.0 * pi * i / (n - 1));
    g.back() = 2.0 * pi;
    if (std::none_of(g.begin(), g.end(), [](double e) { return e == pi; })) g.push_back(pi);
    std::sort(g.begin(), g.end());
    return g;
}

std::pair<std::vector<FloquetBand>, std::vector<SpectralGap>> extract_bands(const Eigen::MatrixXd& curves,
                                                                             double threshold, double gap_tol) {
    std::vector<FloquetBand> bands;
    for (Eigen::Index p = 0; p < curves.cols(); ++p) {
        FloquetBand b;
        b.p = static_cast<int>(p) + 1;
        b.lower = curves.col(p).minCoeff();
        b.upper = curves.col(p).maxCoeff();
        b.below_threshold = b.upper < threshold;
        bands.push_back(b);
    }
    std::vector<FloquetBand> sorted = bands;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.lower < b.lower; });
    std::vector<SpectralGap> gaps;
    if (!sorted.empty()) {
        double hi = sorted.front().upper;
        for (std::size_t i = 1; i < sorted.size(); ++i) {
            if (sorted[i].lower - hi > gap_tol) gaps.push_back({hi, sorted[i].lower});
            hi = std::max(hi, sorted[i].upper);
        }
    }
    return {bands, gaps};
}

void extract_bands(BandDiagram& d, double gap_tol) {
    auto [b, g] = extract_bands(d.curves, d.threshold, gap_tol);
    d.bands = std::move(b);
    d.gaps = std::move(g);
}

BandDiagram band_diagram(const GeometryTee& g, double eps, const std::vector<double>& eta_grid, int p_max,
                         const FloquetOptions& opt) {
    if (!(eps > 0 && eps <= 0.2)) throw FloquetError("eps must lie in (0, 0.2]");
    if (p_max < 1) throw FloquetError("p_max must be >= 1");
    if (eta_grid.empty()) throw FloquetError("empty eta grid");
    for (std::size_t i = 0; i < eta_grid.size(); ++i) {
        if (!(eta_grid[i] >= 0 && eta_grid[i] <= 2 * pi)) throw FloquetError("eta outside [0, 2 pi]");
        if (i > 0 && !(eta_grid[i] > eta_grid[i - 1])) throw FloquetError("eta grid must be ascending");
    }
    const Mesh mesh = build_cell_mesh(g, eps, opt.mesh.h, opt.mesh.order);
    const SparseOperatorPair ops = assemble(mesh);

    BandDiagram d;
    d.eps = eps;
    d.eta_grid = eta_grid;
    d.threshold = pi * pi / (eps * eps);
    const std::size_t n = eta_grid.size();
    d.curves.resize(static_cast<Eigen::Index>(n), p_max);
    d.max_residual.assign(n, 0.0);

    // Indices that must be solved; the rest copy their mirror image.
    std::vector<std::size_t> solve_idx;
    std::vector<long> mirror(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (opt.use_conjugation && eta_grid[i] > pi) {
            const double target = 2 * pi - eta_grid[i];
            for (std::size_t j = 0; j < n; ++j)
                if (eta_grid[j] <= pi && std::abs(eta_grid[j] - target) < 1e-12) {
                    mirror[i] = static_cast<long>(j);
                    break;
                }
        }
        if (mirror[i] < 0) solve_idx.push_back(i);
    }

    const double kscale = max_abs_entry(ops.K);
    parallel_for(solve_idx.size(), [&](std::size_t t) {
        const std::size_t i = solve_idx[t];
        const auto q = apply_quasi_periodic(ops, mesh, eta_grid[i]);
        EigenResult r;
        try {
            r = smallest_eigenpairs(q.K, q.M, p_max, opt.eig);
        } catch (const NumericsError& e) {
            throw FloquetError("eigensolver failed at eta = " + std::to_string(eta_grid[i]) + ": " + e.what());
        }
        double mr = 0.0;
        for (int p = 0; p < p_max; ++p) {
            d.curves(static_cast<Eigen::Index>(i), p) = r.values[p] / (eps * eps);
            mr = std::max(mr, r.residuals[p] / kscale);
        }
        d.max_residual[i] = mr;
    });
    for (std::size_t i = 0; i < n; ++i)
        if (mirror[i] >= 0) {
            d.curves.row(static_cast<Eigen::Index>(i)) = d.curves.row(mirror[i]);
            d.max_residual[i] = d.max_residual[mirror[i]];
        }
    extract_bands(d, opt.gap_tol);
    return d;
}

std::vector<BandDiagram> spectrum_vs_H(double ell, const std::vector<double>& H_grid, double eps, int p_max,
                                       const std::vector<double>& eta_grid, const FloquetOptions& opt) {
    std::vector<BandDiagram> out;
    for (double H : H_grid) {
        GeometryTee g;
        g.ell = ell;
        g.H = H;
        g.L = 0.5 / eps;
        out.push_back(band_diagram(g, eps, eta_grid, p_max, opt));
    }
    return out;
}

TrappedSpectrum trapped_modes(const GeometryTee& g, const MeshParams& mp, double L_trap) {
    if (!(L_trap >= 3)) throw FloquetError("L_trap must be at least 3");
    GeometryTee t = g;
    t.L = L_trap;
    t.validate();
    const Mesh mesh = build_tee_mesh(t, mp.h, mp.order);
    const SparseOperatorPair ops =
        assemble(mesh, {BoundaryTag::wall, BoundaryTag::lid, BoundaryTag::face_left, BoundaryTag::face_right});

    int k = 4;
    EigenResult r;
    for (;;) {
        r = smallest_eigenpairs(ops.K, ops.M, k);
        if (r.values.back() >= pi * pi || k >= 64) break;
        k *= 2;
    }

    // Stations on vertical grid lines right of the stub.
    std::set<double> xs;
    for (const auto& p : mesh.nodes) xs.insert(p.x());
    auto snap = [&](double x) {
        auto it = xs.lower_bound(x);
        if (it == xs.end()) return *xs.rbegin();
        if (it != xs.begin() && std::abs(*std::prev(it) - x) < std::abs(*it - x)) --it;
        return *it;
    };
    const double x0 = snap(0.5 * g.ell + 1.0);
    const double x1 = snap(std::min(0.5 * g.ell + 2.0, L_trap - 1.0));
    if (!(x1 > x0)) throw FloquetError("trapped_modes: decay stations coincide, increase L_trap");

    TrappedSpectrum ts;
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        const double mu = r.values[i];
        if (mu >= pi * pi) break;
        VecC v = r.vectors.col(static_cast<Eigen::Index>(i));
        Eigen::Index jmax = 0;
        v.cwiseAbs().maxCoeff(&jmax);
        v *= std::conj(v(jmax)) / std::abs(v(jmax));
        const double beta = std::sqrt(pi * pi - mu);
        const double cp0 = line_projection(v, mesh, ops.dofs, x0).real();
        const double cp1 = line_projection(v, mesh, ops.dofs, x1).real();
        const double cm0 = line_projection(v, mesh, ops.dofs, -x0).real();
        const double cm1 = line_projection(v, mesh, ops.dofs, -x1).real();
        // least squares for K in c(x) = K exp(-beta |x|)
        auto fit = [&](double c0, double c1) {
            const double e0 = std::exp(-beta * x0), e1 = std::exp(-beta * x1);
            return (c0 * e0 + c1 * e1) / (e0 * e0 + e1 * e1);
        };
        ts.mus.push_back(mu);
        ts.K_coeffs.emplace_back(fit(cp0, cp1), fit(cm0, cm1));
        ts.fitted_beta.push_back(cp0 * cp1 > 0 ? std::log(cp0 / cp1) / (x1 - x0) : std::nan(""));
        ts.near_threshold.push_back(pi * pi - mu < 1e-3);
    }
    ts.N_bullet = static_cast<int>(ts.mus.size());
    return ts;
}

DeviationReport compare_with_model(const BandDiagram& d, const std::vector<BandInterval>& model) {
    std::vector<FloquetBand> above;
    for (const auto& b : d.bands)
        if (!b.below_threshold) above.push_back(b);
    std::sort(above.begin(), above.end(), [](const auto& a, const auto& b) { return a.lower < b.lower; });
    DeviationReport rep;
    rep.count_mismatch = above.size() != model.size();
    const std::size_t n = std::min(above.size(), model.size());
    for (std::size_t i = 0; i < n; ++i) {
        ModelDeviation m;
        m.m = model[i].m;
        m.lower_dev = std::abs(above[i].lower - (d.threshold + model[i].lower));
        m.upper_dev = std::abs(above[i].upper - (d.threshold + model[i].upper));
        m.normalized = std::max(m.lower_dev, m.upper_dev) / d.eps;
        rep.max_deviation = std::max(rep.max_deviation, std::max(m.lower_dev, m.upper_dev));
        rep.rows.push_back(m);
    }
    return rep;
}

} // namespace qwg
