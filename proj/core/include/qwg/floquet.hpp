#pragma once

#include <utility>
#include <vector>

#include "qwg/mesh.hpp"
#include "qwg/numerics.hpp"
#include "qwg/reduced_model.hpp"
#include "qwg/scattering.hpp"

namespace qwg {

class FloquetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FloquetBand {
    int p = 1;
    double lower = 0.0;
    double upper = 0.0;
    bool below_threshold = false;

    double width() const { return upper - lower; }
    double relative_width() const { return (upper - lower) / (0.5 * std::abs(upper + lower)); }
};

struct SpectralGap {
    double lower = 0.0;
    double upper = 0.0;
    double width() const { return upper - lower; }
};

struct BandDiagram {
    double eps = 0.1;
    std::vector<double> eta_grid;
    Eigen::MatrixXd curves; // row per eta, column per p; physical units
    double threshold = 0.0; // pi^2 / eps^2
    std::vector<FloquetBand> bands;
    std::vector<SpectralGap> gaps;
    std::vector<double> max_residual; // per eta, relative to the scaled pencil
};

struct FloquetOptions {
    MeshParams mesh{0.05, 2};
    EigenOptions eig{};
    // Reuse Lambda(eta) for 2 pi - eta when the grid is mirror symmetric.
    bool use_conjugation = true;
    double gap_tol = 0.0;
};

// 64 uniform samples of [0, 2 pi] plus pi.
std::vector<double> default_eta_grid(int n = 64);

BandDiagram band_diagram(const GeometryTee& g, double eps, const std::vector<double>& eta_grid, int p_max,
                         const FloquetOptions& opt = {});

std::pair<std::vector<FloquetBand>, std::vector<SpectralGap>> extract_bands(const Eigen::MatrixXd& curves,
                                                                             double threshold, double gap_tol = 0.0);
void extract_bands(BandDiagram& d, double gap_tol = 0.0);

std::vector<BandDiagram> spectrum_vs_H(double ell, const std::vector<double>& H_grid, double eps, int p_max,
                                       const std::vector<double>& eta_grid, const FloquetOptions& opt = {});

struct TrappedSpectrum {
    std::vector<double> mus;
    std::vector<std::pair<double, double>> K_coeffs; // (K_plus, K_minus)
    std::vector<double> fitted_beta;                 // two-station decay rate on x > 0
    std::vector<bool> near_threshold;                // within 1e-3 of pi^2
    int N_bullet = 0;
};

TrappedSpectrum trapped_modes(const GeometryTee& g, const MeshParams& mp, double L_trap = 6.0);

struct ModelDeviation {
    int m = 1;
    double lower_dev = 0.0;
    double upper_dev = 0.0;
    double normalized = 0.0; // max(lower_dev, upper_dev) / eps
};

struct DeviationReport {
    std::vector<ModelDeviation> rows;
    bool count_mismatch = false;
    double max_deviation = 0.0;
};

// Compares above-threshold bands with threshold + model band, matched in order.
DeviationReport compare_with_model(const BandDiagram& d, const std::vector<BandInterval>& model);

} // namespace qwg
