#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qwg {

// One-dimensional reduced dispersion model
//   cos(sqrt(nu)) - (T rho / 2) sin(sqrt(nu))/sqrt(nu) = sin(2 theta) cos(eta)
// together with its limiting cases and perturbative corrections.

struct ModelParams {
    double theta = 0.0; // [0, pi)
    double T = 1.0;     // > 0
    double rho = 0.0;

    static ModelParams from_sin2theta(double s, double T, double rho);
    // |sin 2theta| as used by the dispersion relation
    double coupling() const;
};

struct BandInterval {
    int m = 1;
    double lower = 0.0;
    double upper = 0.0;
    bool degenerate = false;

    double width() const { return upper - lower; }
};

struct PerturbationCoeffs {
    double m_Omega = 0.0;
    double M_Omega = 0.0;
    double C_Omega = 0.0; // carried along, not used by any formula
    double Lambda0 = 0.0;
};

class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

double g_cos(double nu);       // cos sqrt(nu), cosh sqrt(-nu) for nu < 0
double g_sinc(double nu);      // sin sqrt(nu)/sqrt(nu), entire in nu
double dispersion_function(double nu, const ModelParams& p);
double dispersion_derivative(double nu, const ModelParams& p); // d/dnu

// Lower end of the root search for the given parameters.
double search_floor(const ModelParams& p);

// m-th smallest root of f(nu) = sin(2theta) cos(eta).
double solve_nu(int m, double eta, const ModelParams& p);

BandInterval band_interval(int m, const ModelParams& p);
std::vector<BandInterval> band_intervals(int m_max, const ModelParams& p);

struct BreathingRow {
    double rho = 0.0;
    BandInterval band;
    bool dived = false;      // lower endpoint below zero
    bool submerged = false;  // whole band below zero
};

std::vector<BreathingRow> breathing_sweep(const ModelParams& base, const std::vector<double>& rho_grid,
                                          int m_max);

enum class Direction { plus_infinity, minus_infinity };

struct AsymptoticLimit {
    bool quadratic = false; // value is the coefficient of rho^2 when true
    double value = 0.0;
};

AsymptoticLimit asymptotic_band_limits(int m, const ModelParams& p, Direction d);

enum class LimitCase { dirichlet, neumann, kirchhoff, anti_kirchhoff };

double case_bands_exact(LimitCase c, double eta, int k);

double case_i_nu_tilde(const Eigen::Matrix2d& M, int m, double eta);
BandInterval case_i_band(const Eigen::Matrix2d& M, int m);

double first_order_shift(double nu, const PerturbationCoeffs& c);

struct GapEigen {
    double lambda_minus = 0.0;
    double lambda_plus = 0.0;
    double gap = 0.0;
};

Eigen::Matrix2d gap_matrix(double t, const PerturbationCoeffs& c);
GapEigen gap_matrix_eigen(double t, const PerturbationCoeffs& c);

// Exponentially thin band emitted by a trapped mode mu_p below the threshold.
std::pair<double, double> below_threshold_band(double mu_p, double K_plus, double K_minus, double eps);

} // namespace qwg
