#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qwg/floquet.hpp"

using namespace qwg;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> uniform_eta(int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(2 * pi * i / (n - 1));
    return g;
}

} // namespace

TEST_CASE("default eta grid") {
    const auto g = default_eta_grid(64);
    CHECK(g.size() == 65);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 2 * pi);
    CHECK(std::count(g.begin(), g.end(), pi) == 1);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
    CHECK(default_eta_grid(3).size() == 3);
    CHECK_THROWS_AS(default_eta_grid(1), FloquetError);
}

TEST_CASE("extract_bands") {
    Eigen::MatrixXd flat(4, 1);
    flat << 3, 3, 3, 3;
    auto [b0, g0] = extract_bands(flat, 10.0);
    REQUIRE(b0.size() == 1);
    CHECK(b0[0].width() == 0.0);
    CHECK(b0[0].below_threshold);
    CHECK(g0.empty());

    Eigen::MatrixXd two(3, 2);
    two << 0, 2, 0.5, 2.5, 1, 3;
    auto [b1, g1] = extract_bands(two, 2.5);
    REQUIRE(g1.size() == 1);
    CHECK(g1[0].lower == 1.0);
    CHECK(g1[0].upper == 2.0);
    CHECK(b1[0].below_threshold);
    CHECK_FALSE(b1[1].below_threshold);

    Eigen::MatrixXd touching(2, 2);
    touching << 0, 1, 1, 2;
    CHECK(extract_bands(touching, 0.0).second.empty());

    // overlapping bands merge before gaps are reported
    Eigen::MatrixXd overlap(2, 3);
    overlap << 0, 0.5, 4, 2, 3, 5;
    auto [b3, g3] = extract_bands(overlap, 0.0);
    REQUIRE(g3.size() == 1);
    CHECK(g3[0].lower == 3.0);
    CHECK(g3[0].upper == 4.0);

    // gaps narrower than gap_tol are ignored
    Eigen::MatrixXd narrow(1, 2);
    narrow << 1.0, 1.001;
    CHECK(extract_bands(narrow, 0.0, 0.01).second.empty());
}

TEST_CASE("pure strip cell has no gaps above threshold") {
    const double eps = 0.1;
    FloquetOptions opt;
    opt.mesh = {0.1, 2};
    // the k = +-1 pair at eta = 0 splits by about 1e-4 on this mesh
    opt.gap_tol = 1e-3;
    const auto d = band_diagram(GeometryTee::strip(1.0), eps, uniform_eta(17), 4, opt);
    CHECK(d.threshold == doctest::Approx(pi * pi / (eps * eps)));
    CHECK(d.gaps.empty());
    for (const auto& b : d.bands) CHECK_FALSE(b.below_threshold);
    // curves are threshold + (eta + 2 pi k)^2; the transverse P2 error is amplified by 1/eps^2
    for (Eigen::Index i = 0; i < d.curves.rows(); ++i) {
        const double eta = d.eta_grid[i];
        std::vector<double> exact;
        for (int k = -2; k <= 2; ++k) exact.push_back(d.threshold + (eta + 2 * pi * k) * (eta + 2 * pi * k));
        std::sort(exact.begin(), exact.end());
        for (int p = 0; p < 4; ++p) CHECK(std::abs(d.curves(i, p) - exact[p]) <= 3e-2);
        for (int p = 1; p < 4; ++p) CHECK(d.curves(i, p - 1) <= d.curves(i, p));
        CHECK(d.max_residual[i] <= 1e-8);
    }

    const auto model = band_intervals(4, ModelParams{pi / 4, 1.0, 0.0});
    const auto rep = compare_with_model(d, model);
    CHECK_FALSE(rep.count_mismatch);
    CHECK(rep.max_deviation <= 3e-2);
}

TEST_CASE("conjugation symmetry of the dispersion curves") {
    const GeometryTee g{1.6, 2.5, 2.0, true};
    FloquetOptions opt;
    opt.mesh = {0.1, 2};
    opt.use_conjugation = false;
    const auto eta = uniform_eta(9);
    const auto d = band_diagram(g, 0.2, eta, 4, opt);
    const auto n = static_cast<Eigen::Index>(eta.size());
    for (Eigen::Index i = 0; i < n; ++i)
        for (int p = 0; p < 4; ++p)
            CHECK(std::abs(d.curves(i, p) - d.curves(n - 1 - i, p)) <= 1e-6 * d.curves(i, p));

    opt.use_conjugation = true;
    const auto m = band_diagram(g, 0.2, eta, 4, opt);
    CHECK((m.curves - d.curves).cwiseAbs().maxCoeff() <= 1e-6 * d.curves.maxCoeff());
}

TEST_CASE("eigenvalues decrease as the stub grows") {
    FloquetOptions opt;
    opt.mesh = {0.1, 2};
    const auto eta = uniform_eta(5);
    const auto diagrams = spectrum_vs_H(1.6, {2.0, 2.5, 3.0}, 0.2, 4, eta, opt);
    REQUIRE(diagrams.size() == 3);
    for (std::size_t k = 1; k < diagrams.size(); ++k)
        for (Eigen::Index i = 0; i < diagrams[k].curves.rows(); ++i)
            for (int p = 0; p < 4; ++p) CHECK(diagrams[k].curves(i, p) <= diagrams[k - 1].curves(i, p));
}

TEST_CASE("band diagram argument checks") {
    const GeometryTee g{1.6, 2.5, 2.0, true};
    CHECK_THROWS_AS(band_diagram(g, 0.3, uniform_eta(3), 2), FloquetError);
    CHECK_THROWS_AS(band_diagram(g, 0.1, uniform_eta(3), 0), FloquetError);
    CHECK_THROWS_AS(band_diagram(g, 0.1, {}, 2), FloquetError);
    CHECK_THROWS_AS(band_diagram(g, 0.1, {0.0, 7.0}, 2), FloquetError);
    CHECK_THROWS_AS(band_diagram(g, 0.1, {1.0, 0.5}, 2), FloquetError);
}

TEST_CASE("trapped modes below the threshold") {
    const GeometryTee g{1.6, 2.5, 2.0, true};
    const auto t = trapped_modes(g, {0.05, 2});
    CHECK(t.N_bullet == 2);
    REQUIRE(t.mus.size() == 2);
    CHECK(t.mus[0] > 0);
    CHECK(t.mus[0] < t.mus[1]);
    CHECK(t.mus[1] < pi * pi);
    for (std::size_t p = 0; p < t.mus.size(); ++p) {
        const double beta = std::sqrt(pi * pi - t.mus[p]);
        CHECK(std::abs(t.fitted_beta[p] / beta - 1.0) <= 0.02);
        CHECK_FALSE(t.near_threshold[p]);
        const auto [kp, km] = t.K_coeffs[p];
        CHECK(std::abs(std::abs(kp) - std::abs(km)) <= 1e-3 * std::max(std::abs(kp), 1e-3));
    }
    CHECK_THROWS_AS(trapped_modes(g, {0.05, 2}, 2.0), FloquetError);
}

TEST_CASE("model comparison") {
    BandDiagram d;
    d.eps = 0.1;
    d.threshold = 100.0;
    d.bands = {{1, 50.0, 50.0, true}, {2, 102.0, 105.0, false}, {3, 130.0, 140.0, false}};
    const std::vector<BandInterval> model{{1, 2.0, 5.0, false}, {2, 30.0, 40.0, false}};
    const auto same = compare_with_model(d, model);
    CHECK_FALSE(same.count_mismatch);
    CHECK(same.max_deviation == 0.0);
    REQUIRE(same.rows.size() == 2);

    const auto fewer = compare_with_model(d, {{1, 2.0, 6.0, false}});
    CHECK(fewer.count_mismatch);
    CHECK(fewer.max_deviation == doctest::Approx(1.0));
    CHECK(fewer.rows[0].normalized == doctest::Approx(10.0));
}

TEST_CASE("tee deviations from the Dirichlet model shrink with eps") {
    const GeometryTee g{1.6, 2.5, 2.0, true};
    FloquetOptions opt;
    opt.mesh = {0.05, 2};
    const auto eta = uniform_eta(9);
    std::vector<BandInterval> model;
    for (int m = 1; m <= 2; ++m) model.push_back({m, m * m * pi * pi, m * m * pi * pi, true});
    double prev = 1e300;
    for (double eps : {0.1, 0.05}) {
        const auto d = band_diagram(g, eps, eta, 4, opt);
        int below = 0;
        for (const auto& b : d.bands) below += b.below_threshold;
        CHECK(below == 2);
        const auto rep = compare_with_model(d, model);
        CHECK_FALSE(rep.count_mismatch);
        CHECK(rep.max_deviation < prev);
        prev = rep.max_deviation;
    }
}
