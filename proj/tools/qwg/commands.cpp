#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "output.hpp"
#include "qwg/fem.hpp"
#include "qwg/floquet.hpp"
#include "qwg/reduced_model.hpp"
#include "qwg/scattering.hpp"

namespace qwg::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double pi = std::numbers::pi;

struct Artifacts {
    fs::path base;

    explicit Artifacts(const RunConfig& cfg) {
        fs::create_directories(cfg.out_dir);
        base = fs::path(cfg.out_dir) / (std::string(command_name(cfg.command)) + "-" + cfg.hash());
    }
    fs::path with(const char* ext) const { return fs::path(base.string() + ext); }

    void write(const Table& t, const Plot& p, json j, const RunConfig& cfg) const {
        json doc;
        doc["command"] = command_name(cfg.command);
        doc["config"] = cfg.canonical();
        doc["result"] = std::move(j);
        t.write(with(".csv"));
        p.write(with(".svg"));
        write_json(with(".json"), doc);
        std::cout << with(".csv").string() << "\n" << with(".svg").string() << "\n" << with(".json").string() << "\n";
    }
};

json band_json(const BandInterval& b) {
    return {{"m", b.m}, {"lower", b.lower}, {"upper", b.upper}, {"degenerate", b.degenerate}};
}

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

int dispersion(const RunConfig& cfg) {
    const auto p = cfg.model(cfg.rho.values.front());
    Table t({"eta", "m", "nu"});
    Plot plot{"reduced dispersion relation", "eta", "nu", {}, {}};
    for (int m = 1; m <= cfg.m_max; ++m) {
        Series s{"m=" + std::to_string(m), {}, {}};
        for (double eta : cfg.eta.values) {
            const double nu = solve_nu(m, eta, p);
            t.row().add(eta).add(static_cast<long long>(m)).add(nu);
            s.x.push_back(eta);
            s.y.push_back(nu);
        }
        plot.series.push_back(std::move(s));
    }
    json j;
    j["coupling"] = p.coupling();
    j["bands"] = json::array();
    for (const auto& b : band_intervals(cfg.m_max, p)) j["bands"].push_back(band_json(b));
    Artifacts(cfg).write(t, plot, j, cfg);
    return 0;
}

int breathing(const RunConfig& cfg) {
    const auto rows = breathing_sweep(cfg.model(0.0), cfg.rho.values, cfg.m_max);
    Table t({"rho", "m", "c_minus", "c_plus", "degenerate"});
    std::vector<Series> lo(cfg.m_max), hi(cfg.m_max);
    json first_dived = json::object(), first_submerged = json::object();
    for (const auto& r : rows) {
        const int m = r.band.m;
        t.row().add(r.rho).add(static_cast<long long>(m)).add(r.band.lower).add(r.band.upper).add(
            static_cast<long long>(r.band.degenerate));
        lo[m - 1].x.push_back(r.rho);
        lo[m - 1].y.push_back(r.band.lower);
        hi[m - 1].x.push_back(r.rho);
        hi[m - 1].y.push_back(r.band.upper);
        const std::string key = std::to_string(m);
        if (r.dived && !first_dived.contains(key)) first_dived[key] = r.rho;
        if (r.submerged && !first_submerged.contains(key)) first_submerged[key] = r.rho;
    }
    Plot plot{"band edges against rho", "rho", "nu", {}, {0.0}};
    for (int m = 0; m < cfg.m_max; ++m) {
        lo[m].name = "m=" + std::to_string(m + 1) + " lower";
        hi[m].name = "m=" + std::to_string(m + 1) + " upper";
        plot.series.push_back(lo[m]);
        plot.series.push_back(hi[m]);
    }
    json j;
    j["coupling"] = cfg.model(0.0).coupling();
    j["first_rho_dived"] = first_dived;
    j["first_rho_submerged"] = first_submerged;
    Artifacts(cfg).write(t, plot, j, cfg);
    return 0;
}

int scattering(const RunConfig& cfg) {
    const auto g = cfg.geometry();
    const auto S = threshold_scattering_matrix(g, cfg.mesh());
    const auto e = eigenphases(S);
    const int dim = classify_X_dagger(S);

    Table t({"quantity", "re", "im"});
    const std::pair<const char*, cplx> entries[] = {{"s_pp", S.s_pp}, {"s_pm", S.s_pm}, {"s_mp", S.s_mp},
                                                    {"s_mm", S.s_mm}, {"tau1", e.values(0)}, {"tau2", e.values(1)}};
    for (const auto& [name, z] : entries) t.row().add(std::string(name)).add(z.real()).add(z.imag());

    Plot plot{"eigenvalues of S on the unit circle", "Re", "Im", {}, {}};
    Series circle{"unit circle", {}, {}};
    for (int k = 0; k <= 128; ++k) {
        circle.x.push_back(std::cos(2 * pi * k / 128));
        circle.y.push_back(std::sin(2 * pi * k / 128));
    }
    plot.series.push_back(circle);
    for (int k = 0; k < 2; ++k)
        plot.series.push_back({"tau" + std::to_string(k + 1), {e.values(k).real()}, {e.values(k).imag()}});

    json j;
    j["S"] = {{"s_pp", cplx_json(S.s_pp)}, {"s_pm", cplx_json(S.s_pm)}, {"s_mp", cplx_json(S.s_mp)},
              {"s_mm", cplx_json(S.s_mm)}};
    j["unitarity_residual"] = S.unitarity_residual;
    j["symmetry_residual"] = S.symmetry_residual;
    j["eigenphases"] = {e.phase1, e.phase2};
    j["dim_X_dagger"] = dim;
    if (dim == 1) j["theta"] = theta_from_S(S);
    if (dim == 0) {
        const auto P = polarization_matrix(S);
        j["polarization"] = {{P.M(0, 0), P.M(0, 1)}, {P.M(1, 0), P.M(1, 1)}};
        j["polarization_imag_residual"] = P.imag_residual;
    }
    const auto r = half_domain_reflections(g, cfg.mesh());
    j["r_N"] = cplx_json(r.r_N);
    j["r_D"] = cplx_json(r.r_D);
    Artifacts(cfg).write(t, plot, j, cfg);
    return 0;
}

int track(const RunConfig& cfg) {
    TrackOptions opt;
    opt.mesh = cfg.mesh();
    opt.L = cfg.L;
    const auto& Hs = cfg.H_range.values;
    const auto tr = track_over_H(cfg.ell, Hs.front(), Hs.back(), static_cast<int>(Hs.size()), opt);

    Table t({"H", "phase1", "phase2", "unitarity_residual"});
    Series s1{"phase 1", {}, {}}, s2{"phase 2", {}, {}};
    for (std::size_t i = 0; i < tr.H_grid.size(); ++i) {
        t.row().add(tr.H_grid[i]).add(tr.phase1[i]).add(tr.phase2[i]).add(tr.unitarity_residual[i]);
        s1.x.push_back(tr.H_grid[i]);
        s1.y.push_back(tr.phase1[i]);
        s2.x.push_back(tr.H_grid[i]);
        s2.y.push_back(tr.phase2[i]);
    }
    Plot plot{"eigenphases of S against H", "H", "phase (unwrapped)", {s1, s2}, {}};
    double lo = 1e300, hi = -1e300;
    for (double v : tr.phase1) lo = std::min(lo, v), hi = std::max(hi, v);
    for (double v : tr.phase2) lo = std::min(lo, v), hi = std::max(hi, v);
    for (double c = pi * (2 * std::floor((lo - pi) / (2 * pi)) + 1); c <= hi; c += 2 * pi)
        if (c >= lo) plot.hlines.push_back(c);

    json j;
    j["crossings"] = tr.crossings;
    j["crossing_branch"] = tr.crossing_branch;
    json spacing = json::array();
    for (std::size_t i = 1; i < tr.crossings.size(); ++i) spacing.push_back(tr.crossings[i] - tr.crossings[i - 1]);
    j["spacings"] = spacing;
    j["max_jump"] = tr.max_jump;
    j["ambiguous"] = tr.ambiguous;
    Artifacts(cfg).write(t, plot, j, cfg);
    for (double c : tr.crossings) std::printf("crossing H = %.6f\n", c);
    return 0;
}

FloquetOptions floquet_options(const RunConfig& cfg) {
    FloquetOptions opt;
    opt.mesh = cfg.mesh();
    return opt;
}

json diagram_json(const BandDiagram& d) {
    json j;
    j["threshold"] = d.threshold;
    j["bands"] = json::array();
    for (const auto& b : d.bands)
        j["bands"].push_back({{"p", b.p}, {"lower", b.lower}, {"upper", b.upper},
                              {"below_threshold", b.below_threshold}, {"relative_width", b.relative_width()}});
    j["gaps"] = json::array();
    for (const auto& g : d.gaps) j["gaps"].push_back({g.lower, g.upper});
    double res = 0.0;
    for (double r : d.max_residual) res = std::max(res, r);
    j["max_residual"] = res;
    return j;
}

int floquet_bands(const RunConfig& cfg) {
    const auto d = band_diagram(cfg.geometry(), cfg.eps, default_eta_grid(cfg.eta_samples), cfg.p_max,
                                floquet_options(cfg));
    Table t({"eta", "p", "Lambda", "Lambda_minus_threshold"});
    Plot plot{"dispersion curves of the periodic waveguide", "eta", "Lambda - pi^2/eps^2", {}, {0.0}};
    for (int p = 0; p < d.curves.cols(); ++p) {
        Series s{"p=" + std::to_string(p + 1), {}, {}};
        for (Eigen::Index i = 0; i < d.curves.rows(); ++i) {
            t.row().add(d.eta_grid[i]).add(static_cast<long long>(p + 1)).add(d.curves(i, p)).add(
                d.curves(i, p) - d.threshold);
            s.x.push_back(d.eta_grid[i]);
            s.y.push_back(d.curves(i, p) - d.threshold);
        }
        plot.series.push_back(std::move(s));
    }
    Artifacts(cfg).write(t, plot, diagram_json(d), cfg);
    return 0;
}

int spectrum(const RunConfig& cfg) {
    const auto ds = spectrum_vs_H(cfg.ell, cfg.H_range.values, cfg.eps, cfg.p_max, default_eta_grid(cfg.eta_samples),
                                  floquet_options(cfg));
    Table t({"H", "p", "lower", "upper", "below_threshold"});
    Plot plot{"band intervals against H", "H", "Lambda - pi^2/eps^2", {}, {0.0}};
    json j = json::array();
    for (std::size_t k = 0; k < ds.size(); ++k) {
        const double H = cfg.H_range.values[k];
        for (const auto& b : ds[k].bands) {
            t.row().add(H).add(static_cast<long long>(b.p)).add(b.lower).add(b.upper).add(
                static_cast<long long>(b.below_threshold));
            plot.series.push_back({"", {H, H}, {b.lower - ds[k].threshold, b.upper - ds[k].threshold}});
        }
        json e = diagram_json(ds[k]);
        e["H"] = H;
        j.push_back(e);
    }
    Artifacts(cfg).write(t, plot, j, cfg);
    return 0;
}

int gap_model(const RunConfig& cfg) {
    const PerturbationCoeffs c{cfg.m_omega, cfg.M_omega, 0.0, cfg.lambda0};
    Table t({"t", "lambda_minus", "lambda_plus", "gap"});
    Series lo{"lambda-", {}, {}}, hi{"lambda+", {}, {}};
    double min_gap = 1e300;
    for (double tv : cfg.t.values) {
        const auto g = gap_matrix_eigen(tv, c);
        t.row().add(tv).add(g.lambda_minus).add(g.lambda_plus).add(g.gap);
        lo.x.push_back(tv);
        lo.y.push_back(g.lambda_minus);
        hi.x.push_back(tv);
        hi.y.push_back(g.lambda_plus);
        min_gap = std::min(min_gap, g.gap);
    }
    Plot plot{"first-order eigenvalues near the band edge", "t", "lambda", {lo, hi}, {}};
    json j;
    j["min_gap"] = min_gap;
    j["gap_closes"] = cfg.m_omega + cfg.M_omega == 0.0;
    Artifacts(cfg).write(t, plot, j, cfg);
    return 0;
}

struct Check {
    std::string name;
    double value;
    double tolerance;
    bool pass;
};

int validate(const RunConfig& cfg) {
    std::vector<Check> checks;
    auto add = [&](std::string name, double value, double tol, bool pass) {
        checks.push_back({std::move(name), value, tol, pass});
    };
    auto guarded = [&](const std::string& name, const std::function<void()>& f) {
        try {
            f();
        } catch (const std::exception& e) {
            add(name + " (" + e.what() + ")", NAN, 0.0, false);
        }
    };
    std::mt19937_64 rng(cfg.seed);

    guarded("band symmetry in theta", [&] {
        std::uniform_real_distribution<double> th(0.0, pi), Td(0.1, 4.0), rd(-20.0, 20.0);
        int bad = 0;
        for (int i = 0; i < 200; ++i) {
            const double theta = std::ldexp(std::floor(std::ldexp(th(rng), 50)), -50), T = Td(rng), rho = rd(rng);
            const double t3 = theta <= pi / 2 ? pi / 2 - theta : (pi - theta) + pi / 2;
            const auto a = band_intervals(3, {theta, T, rho});
            const auto b = band_intervals(3, {pi - theta, T, rho});
            const auto c = band_intervals(3, {t3, T, rho});
            for (int m = 0; m < 3; ++m)
                bad += !(a[m].lower == b[m].lower && a[m].upper == b[m].upper && a[m].lower == c[m].lower &&
                         a[m].upper == c[m].upper);
        }
        add("band symmetry in theta (mismatches)", bad, 0.0, bad == 0);
    });
    guarded("Kirchhoff tiling", [&] {
        const auto kb = band_intervals(5, {pi / 4, 1.0, 0.0});
        double d = std::abs(kb[0].lower);
        for (int m = 1; m < 5; ++m)
            d = std::max({d, std::abs(kb[m - 1].upper - m * m * pi * pi), std::abs(kb[m].lower - m * m * pi * pi)});
        add("Kirchhoff tiling", d, 1e-10, d <= 1e-10);
    });
    guarded("gap matrix closed form", [&] {
        std::uniform_real_distribution<double> td(-5.0, 5.0), cd(-1.0, 1.0);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const PerturbationCoeffs q{cd(rng), cd(rng), 0.0, pi * pi};
            const double tv = td(rng);
            const auto g = gap_matrix_eigen(tv, q);
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(gap_matrix(tv, q));
            const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
            worst = std::max({worst, std::abs(g.lambda_minus - es.eigenvalues()(0)) / scale,
                              std::abs(g.lambda_plus - es.eigenvalues()(1)) / scale});
        }
        add("gap matrix closed form", worst, 1e-12, worst <= 1e-12);
    });
    guarded("strip scattering matrix", [&] {
        const auto S = threshold_scattering_matrix(GeometryTee::strip(2.0), {0.05, 2});
        Eigen::Matrix2cd ref;
        ref << 0.0, -1.0, -1.0, 0.0;
        const double err = (S.matrix() - ref).cwiseAbs().maxCoeff();
        add("strip scattering matrix", err, 5e-3, err <= 5e-3);
    });
    guarded("tee unitarity", [&] {
        const GeometryTee g{1.6, 2.5, 2.0, true};
        const auto S = threshold_scattering_matrix(g, {0.05, 2});
        add("tee unitarity", S.unitarity_residual, 5e-3, S.unitarity_residual <= 5e-3);
        add("tee symmetry", S.symmetry_residual, 5e-3, S.symmetry_residual <= 5e-3);
        const auto r = half_domain_reflections(g, {0.05, 2});
        const double e = std::max(std::abs(0.5 * (r.r_N + r.r_D) - S.s_pp), std::abs(0.5 * (r.r_N - r.r_D) - S.s_pm));
        add("half/full identities", e, 1e-2, e <= 1e-2);
    });
    guarded("rotation rate", [&] {
        const auto r = rotation_rate_check({1.6, 2.5, 2.0, true}, 1e-3, {0.05, 2}, 0);
        add("rotation rate vs lid flux", r.relative_gap, 0.1, r.relative_gap <= 0.1 && r.numeric_rate > 0);
    });
    guarded("P2 convergence rate", [&] {
        const double eta = 1.0, exact = (eta - 2 * pi) * (eta - 2 * pi);
        double e[2];
        for (int k = 0; k < 2; ++k) {
            const auto ops = interval_operators(1.0, 16 << k, 2);
            const auto q = apply_quasi_periodic(ops, {{0, ops.n_dof - 1}}, eta);
            e[k] = std::abs(dense_eigenpairs(q.K, q.M, 3).values[1] - exact);
        }
        const double rate = std::log2(e[0] / e[1]);
        add("P2 quasi-periodic rate", rate, 0.8, std::abs(rate - 4.0) <= 0.8);
    });
    guarded("strip band diagram", [&] {
        FloquetOptions opt;
        opt.mesh = {0.1, 2};
        opt.gap_tol = 1e-3;
        const auto d = band_diagram(GeometryTee::strip(1.0), 0.2, default_eta_grid(8), 3, opt);
        add("strip cell gaps above threshold", static_cast<double>(d.gaps.size()), 0.0, d.gaps.empty());
    });

    Table t({"check", "value", "tolerance", "status"});
    Plot plot{"validation residuals relative to tolerance", "check", "log10(value / tolerance)", {}, {0.0}};
    json j = json::array();
    int failed = 0;
    std::printf("%-40s %14s %12s  %s\n", "check", "value", "tolerance", "status");
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const auto& c = checks[i];
        std::printf("%-40s %14.6g %12.3g  %s\n", c.name.c_str(), c.value, c.tolerance, c.pass ? "PASS" : "FAIL");
        t.row().add(c.name).add(c.value).add(c.tolerance).add(std::string(c.pass ? "PASS" : "FAIL"));
        if (c.tolerance > 0 && c.value > 0)
            plot.series.push_back({c.name, {double(i)}, {std::log10(c.value / c.tolerance)}});
        j.push_back({{"check", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
        failed += !c.pass;
    }
    for (const auto& c : checks)
        if (!c.pass) std::fprintf(stderr, "qwg: validation failed: %s = %g (tolerance %g)\n", c.name.c_str(), c.value,
                                  c.tolerance);
    Artifacts(cfg).write(t, plot, j, cfg);
    return failed == 0 ? 0 : 1;
}

} // namespace

int run(const RunConfig& cfg) {
    cfg.validate();
    switch (cfg.command) {
    case Command::dispersion: return dispersion(cfg);
    case Command::breathing: return breathing(cfg);
    case Command::scattering: return scattering(cfg);
    case Command::track_H: return track(cfg);
    case Command::floquet_bands: return floquet_bands(cfg);
    case Command::spectrum_vs_H: return spectrum(cfg);
    case Command::gap_model: return gap_model(cfg);
    case Command::validate: return validate(cfg);
    }
    return 2;
}

} // namespace qwg::cli
