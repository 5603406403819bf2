#pragma once

#include <vector>

#include "qwg/fem.hpp"
#include "qwg/mesh.hpp"
#include "qwg/numerics.hpp"

namespace qwg {

class ScatteringError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MeshParams {
    double h = 0.05;
    int order = 2;
};

// Reflection and transmission coefficients at the threshold; "p" is the
// branch x > 0 and "m" the branch x < 0.
struct ThresholdScatteringMatrix {
    cplx s_pp, s_pm, s_mp, s_mm;
    double unitarity_residual = 0.0; // Frobenius norm of S conj(S)^T - I
    double symmetry_residual = 0.0;  // |s_pm - s_mp|

    Eigen::Matrix2cd matrix() const;
    static ThresholdScatteringMatrix from_matrix(const Eigen::Matrix2cd& S);
};

// Full solution data: mesh, unknowns and the two scattering fields.
struct ScatteringSolution {
    ThresholdScatteringMatrix S;
    Mesh mesh;
    DofMap dofs;
    VecC v_plus;  // incident from x = +L
    VecC v_minus; // incident from x = -L
};

ScatteringSolution solve_scattering(const GeometryTee& g, const MeshParams& mp, const MeshLayout& layout = {});
ThresholdScatteringMatrix threshold_scattering_matrix(const GeometryTee& g, const MeshParams& mp);

struct Eigenphases {
    double phase1 = 0.0; // [0, 2 pi)
    double phase2 = 0.0;
    double modulus_deviation = 0.0; // max ||tau| - 1|
    Eigen::Vector2cd values;
    Eigen::Matrix2d vectors;       // real unit columns after phase alignment
    double vector_imag_residual = 0.0;
};

Eigenphases eigenphases(const ThresholdScatteringMatrix& S);

int classify_X_dagger(const ThresholdScatteringMatrix& S, double tol_eig = 1e-2);

// Angle of the real eigenvector (cos, sin) for the eigenvalue nearest -1, in [0, pi).
double theta_from_S(const ThresholdScatteringMatrix& S, double tol_eig = 1e-2);

struct PolarizationResult {
    Eigen::Matrix2d M;          // real part of i (I+S)^{-1} (I-S)
    double imag_residual = 0.0; // largest imaginary entry
    double symmetry_residual = 0.0;
};

PolarizationResult polarization_matrix(const ThresholdScatteringMatrix& S, double tol_eig = 1e-2);

struct HalfReflections {
    cplx r_D;
    cplx r_N;
};

HalfReflections half_domain_reflections(const GeometryTee& g, const MeshParams& mp);

struct EigenphaseTrack {
    std::vector<double> H_grid; // requested samples plus adaptively inserted ones
    std::vector<double> phase1; // unwrapped
    std::vector<double> phase2;
    std::vector<double> unitarity_residual;
    std::vector<ThresholdScatteringMatrix> matrices;
    std::vector<double> crossings;      // H values where a phase passes pi mod 2 pi
    std::vector<int> crossing_branch;   // 1 or 2
    bool ambiguous = false;             // phases came within 0.05 rad of each other
    double max_jump = 0.0;              // largest unwrapped step between neighbours
};

struct TrackOptions {
    MeshParams mesh;
    double L = 2.0;
    bool refine_crossings = true;
    double crossing_tol = 1e-6;
    // Midpoints are inserted while neighbouring phases differ by more than max_step.
    double max_step = 1.5707963267948966;
    int max_refinements = 6;
};

EigenphaseTrack track_over_H(double ell, double H0, double H1, int n_samples, const TrackOptions& opt = {});

struct RotationRate {
    double numeric_rate = 0.0; // d phase / dH by centred difference
    double formula_rate = 0.0; // half the lid integral of |dv/dn|^2
    double relative_gap = 0.0;
    double phase = 0.0;
};

// branch: 0 tracks the eigenvalue whose eigenvector is closest to (1,1)/sqrt2,
// 1 the one closest to (1,-1)/sqrt2.
RotationRate rotation_rate_check(const GeometryTee& g, double dH, const MeshParams& mp, int branch = 0);

} // namespace qwg
