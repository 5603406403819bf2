#include "qwg/reduced_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qwg/numerics.hpp"

namespace qwg {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double kRootTol = 1e-12;
constexpr double kDegenerateWidth = 1e-10;
constexpr double kScanStep = 0.02; // in the signed square root of nu

double signed_sq(double u) { return u * std::abs(u); }
double signed_sqrt(double nu) { return nu >= 0 ? std::sqrt(nu) : -std::sqrt(-nu); }

// Both series are alternating with factorial denominators.
double g_sinc_series(double nu) {
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 12; ++k) {
        term *= -nu / ((2.0 * k) * (2.0 * k + 1.0));
        sum += term;
    }
    return sum;
}

// derivative of sin sqrt(nu)/sqrt(nu): sum_k k (-1)^k nu^(k-1) / (2k+1)!
double g_sinc_prime_series(double nu) {
    double fact = 6.0; // (2k+1)! for k = 1
    double pw = 1.0;
    double sum = 0.0;
    for (int k = 1; k < 16; ++k) {
        sum += (k % 2 ? -1.0 : 1.0) * k * pw / fact;
        pw *= nu;
        fact *= (2.0 * k + 2.0) * (2.0 * k + 3.0);
    }
    return sum;
}

double g_sinc_prime(double nu) {
    if (std::abs(nu) < 0.5) return g_sinc_prime_series(nu);
    return (g_cos(nu) - g_sinc(nu)) / (2.0 * nu);
}

double signed_sin2theta(const ModelParams& p) {
    const double s = std::sin(2.0 * p.theta);
    return s < 0 ? -p.coupling() : p.coupling();
}

// Residuals below are multiplied by exp(-sqrt(-nu)) for nu < 0. The weight is
// positive, so signs and roots are unchanged, and cosh/sinh cannot overflow.
double scaled_residual(double nu, const ModelParams& p, double target) {
    if (nu >= 0) return dispersion_function(nu, p) - target;
    const double s = std::sqrt(-nu);
    if (s < 20.0) return (dispersion_function(nu, p) - target) * std::exp(-s);
    const double e = std::exp(-2.0 * s);
    const double c = 0.5 * (1.0 + e);
    const double sh = 0.5 * (1.0 - e) / s;
    return c - 0.5 * p.T * p.rho * sh - target * std::exp(-s);
}

double scaled_derivative(double nu, const ModelParams& p) {
    if (nu >= 0) return dispersion_derivative(nu, p);
    const double s = std::sqrt(-nu);
    if (s < 20.0) return dispersion_derivative(nu, p) * std::exp(-s);
    const double e = std::exp(-2.0 * s);
    const double c = 0.5 * (1.0 + e);
    const double sh = 0.5 * (1.0 - e) / s;
    return -0.5 * sh - 0.5 * p.T * p.rho * (c - sh) / (2.0 * nu);
}

// Monotone pieces of f: consecutive critical points starting at the search floor.
class PieceScanner {
public:
    explicit PieceScanner(const ModelParams& p) : p_(p), lo_(search_floor(p)) {
        u_ = signed_sqrt(lo_);
        d_ = scaled_derivative(lo_, p_);
    }

    // Next piece [lo, hi] on which f is monotone.
    std::pair<double, double> next() {
        const double start = lo_;
        for (int guard = 0; guard < 10000000; ++guard) {
            const double u1 = u_ + kScanStep;
            const double nu0 = signed_sq(u_);
            const double nu1 = signed_sq(u1);
            const double d1 = scaled_derivative(nu1, p_);
            if (d_ != 0.0 && d1 != 0.0 && (d_ > 0) != (d1 > 0)) {
                const double c = find_root([&](double x) { return scaled_derivative(x, p_); }, nu0, nu1,
                                           kRootTol);
                u_ = u1;
                d_ = d1;
                if (c > start) {
                    lo_ = c;
                    return {start, c};
                }
                continue;
            }
            u_ = u1;
            d_ = d1;
        }
        throw ModelError("dispersion scan exceeded its ceiling");
    }

private:
    ModelParams p_;
    double lo_;
    double u_;
    double d_;
};

// Solve f = target within the monotone piece, clamped to the nearer end.
double solve_in_piece(const ModelParams& p, double lo, double hi, double target) {
    const double flo = scaled_residual(lo, p, target);
    const double fhi = scaled_residual(hi, p, target);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) != (fhi > 0))
        return find_root([&](double x) { return scaled_residual(x, p, target); }, lo, hi, kRootTol);
    return std::abs(flo) < std::abs(fhi) ? lo : hi;
}

bool piece_meets(const ModelParams& p, double lo, double hi, double s) {
    const bool below = scaled_residual(lo, p, s) <= 0 || scaled_residual(hi, p, s) <= 0;
    const bool above = scaled_residual(lo, p, -s) >= 0 || scaled_residual(hi, p, -s) >= 0;
    return below && above;
}

// Piece carrying the m-th band.
std::pair<double, double> band_piece(int m, const ModelParams& p) {
    if (m < 1) throw ModelError("band index must be >= 1");
    PieceScanner scan(p);
    const double s = p.coupling();
    int found = 0;
    for (;;) {
        auto piece = scan.next();
        if (piece_meets(p, piece.first, piece.second, s) && ++found == m) return piece;
    }
}

} // namespace

ModelParams ModelParams::from_sin2theta(double s, double T, double rho) {
    if (s < -1.0 || s > 1.0) throw ModelError("sin(2 theta) must lie in [-1, 1]");
    ModelParams p;
    p.theta = 0.5 * std::asin(s);
    if (p.theta < 0) p.theta += pi;
    p.T = T;
    p.rho = rho;
    return p;
}

double ModelParams::coupling() const {
    // |sin 2 theta| = sin 2e with e the distance from theta to the nearest multiple of pi/2.
    // The candidate that attains the minimum is an exact subtraction, so mirrored angles
    // that are themselves exact doubles give bitwise identical couplings.
    const double t = theta >= 0.0 && theta <= pi ? theta : theta - pi * std::floor(theta / pi);
    const double e = std::min({t, std::abs(0.5 * pi - t), pi - t});
    return std::sin(2.0 * e);
}

double g_cos(double nu) {
    if (nu >= 0) return std::cos(std::sqrt(nu));
    return std::cosh(std::sqrt(-nu));
}

double g_sinc(double nu) {
    if (std::abs(nu) < 1e-4) return g_sinc_series(nu);
    if (nu > 0) {
        const double r = std::sqrt(nu);
        return std::sin(r) / r;
    }
    const double r = std::sqrt(-nu);
    return std::sinh(r) / r;
}

double dispersion_function(double nu, const ModelParams& p) {
    return g_cos(nu) - 0.5 * p.T * p.rho * g_sinc(nu);
}

double dispersion_derivative(double nu, const ModelParams& p) {
    return -0.5 * g_sinc(nu) - 0.5 * p.T * p.rho * g_sinc_prime(nu);
}

double search_floor(const ModelParams& p) {
    if (p.rho > 0) {
        const double a = 0.5 * p.T * p.rho + 2.0;
        return -a * a - 1.0;
    }
    return 0.0;
}

double solve_nu(int m, double eta, const ModelParams& p) {
    const auto piece = band_piece(m, p);
    const double target = signed_sin2theta(p) * std::cos(eta);
    return solve_in_piece(p, piece.first, piece.second, target);
}

BandInterval band_interval(int m, const ModelParams& p) {
    if (!(p.T > 0)) throw ModelError("T must be positive");
    const auto piece = band_piece(m, p);
    const double s = p.coupling();
    const double a = solve_in_piece(p, piece.first, piece.second, s);
    const double b = solve_in_piece(p, piece.first, piece.second, -s);
    BandInterval bi;
    bi.m = m;
    bi.lower = std::min(a, b);
    bi.upper = std::max(a, b);
    bi.degenerate = s == 0.0 || bi.upper - bi.lower < kDegenerateWidth;
    return bi;
}

std::vector<BandInterval> band_intervals(int m_max, const ModelParams& p) {
    if (!(p.T > 0)) throw ModelError("T must be positive");
    std::vector<BandInterval> out;
    PieceScanner scan(p);
    const double s = p.coupling();
    while (static_cast<int>(out.size()) < m_max) {
        auto piece = scan.next();
        if (!piece_meets(p, piece.first, piece.second, s)) continue;
        const double a = solve_in_piece(p, piece.first, piece.second, s);
        const double b = solve_in_piece(p, piece.first, piece.second, -s);
        BandInterval bi;
        bi.m = static_cast<int>(out.size()) + 1;
        bi.lower = std::min(a, b);
        bi.upper = std::max(a, b);
        bi.degenerate = s == 0.0 || bi.upper - bi.lower < kDegenerateWidth;
        out.push_back(bi);
    }
    return out;
}

std::vector<BreathingRow> breathing_sweep(const ModelParams& base, const std::vector<double>& rho_grid,
                                          int m_max) {
    if (m_max < 1) throw ModelError("m_max must be >= 1");
    std::vector<BreathingRow> rows;
    rows.reserve(rho_grid.size() * static_cast<std::size_t>(m_max));
    for (double rho : rho_grid) {
        if (!std::isfinite(rho)) throw ModelError("rho grid contains a non-finite value");
        ModelParams p = base;
        p.rho = rho;
        for (const auto& b : band_intervals(m_max, p)) {
            BreathingRow r;
            r.rho = rho;
            r.band = b;
            r.dived = b.lower < 0;
            r.submerged = b.upper < 0;
            rows.push_back(r);
        }
    }
    return rows;
}

AsymptoticLimit asymptotic_band_limits(int m, const ModelParams& p, Direction d) {
    if (m < 1) throw ModelError("band index must be >= 1");
    if (d == Direction::minus_infinity) return {false, m * m * pi * pi};
    if (m == 1) return {true, -p.T * p.T / 4.0};
    return {false, (m - 1.0) * (m - 1.0) * pi * pi};
}

double case_bands_exact(LimitCase c, double eta, int k) {
    switch (c) {
    case LimitCase::dirichlet:
        if (k < 1) throw ModelError("dirichlet case needs k >= 1");
        return k * k * pi * pi;
    case LimitCase::neumann:
        if (k < 0) throw ModelError("neumann case needs k >= 0");
        return k * k * pi * pi;
    case LimitCase::kirchhoff: {
        const double v = eta + 2.0 * pi * k;
        return v * v;
    }
    case LimitCase::anti_kirchhoff: {
        const double v = eta + pi * (2.0 * k + 1.0);
        return v * v;
    }
    }
    throw ModelError("unknown limit case");
}

double case_i_nu_tilde(const Eigen::Matrix2d& M, int m, double eta) {
    if (m < 1) throw ModelError("band index must be >= 1");
    if (std::abs(M(0, 1) - M(1, 0)) > 1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff()))
        throw ModelError("polarization matrix is not symmetric");
    return -2.0 * m * m * pi * pi * (M(0, 0) + 2.0 * std::cos(eta) * M(0, 1) + M(1, 1));
}

BandInterval case_i_band(const Eigen::Matrix2d& M, int m) {
    const double a = case_i_nu_tilde(M, m, 0.0);
    const double b = case_i_nu_tilde(M, m, pi);
    BandInterval bi;
    bi.m = m;
    bi.lower = std::min(a, b);
    bi.upper = std::max(a, b);
    bi.degenerate = bi.upper - bi.lower < kDegenerateWidth;
    return bi;
}

double first_order_shift(double nu, const PerturbationCoeffs& c) {
    return 2.0 * nu * (c.m_Omega - c.M_Omega);
}

Eigen::Matrix2d gap_matrix(double t, const PerturbationCoeffs& c) {
    if (!(c.Lambda0 > 0)) throw ModelError("Lambda0 must be positive");
    const double sl = std::sqrt(c.Lambda0);
    const double d = c.Lambda0 * (c.M_Omega - c.m_Omega);
    const double off = c.Lambda0 * (c.M_Omega + c.m_Omega);
    Eigen::Matrix2d A;
    A << t * sl + d, off, off, -t * sl + d;
    return 2.0 * A;
}

GapEigen gap_matrix_eigen(double t, const PerturbationCoeffs& c) {
    if (!(c.Lambda0 > 0)) throw ModelError("Lambda0 must be positive");
    const double sum = c.M_Omega + c.m_Omega;
    const double root = std::sqrt(t * t / c.Lambda0 + sum * sum);
    const double center = 2.0 * c.Lambda0 * (c.M_Omega - c.m_Omega);
    GapEigen g;
    g.lambda_minus = center - 2.0 * c.Lambda0 * root;
    g.lambda_plus = center + 2.0 * c.Lambda0 * root;
    g.gap = 4.0 * c.Lambda0 * root;
    return g;
}

std::pair<double, double> below_threshold_band(double mu_p, double K_plus, double K_minus, double eps) {
    if (!(mu_p > 0 && mu_p < pi * pi)) throw ModelError("mu_p must lie in (0, pi^2)");
    if (!(eps > 0)) throw ModelError("eps must be positive");
    const double beta = std::sqrt(pi * pi - mu_p);
    const double inv = 1.0 / (eps * eps);
    const double split = inv * std::exp(-beta / eps) * 4.0 * beta * K_plus * K_minus;
    const double a = inv * mu_p - split;
    const double b = inv * mu_p + split;
    return {std::min(a, b), std::max(a, b)};
}

} // namespace qwg
