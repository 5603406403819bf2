#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qwg {

using cplx = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cplx>;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;

class NumericsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Direct LU factorization of a general complex sparse matrix, reusable for
// several right-hand sides.
class LinearSolver {
public:
    explicit LinearSolver(const SpMat& A);
    ~LinearSolver();
    LinearSolver(LinearSolver&&) noexcept;
    LinearSolver& operator=(LinearSolver&&) noexcept;

    VecC solve(const VecC& b) const;
    MatC solve(const MatC& B) const;
    Eigen::Index size() const { return n_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    Eigen::Index n_ = 0;
};

// Solves Ax = b; throws NumericsError on a singular pivot or if the
// relative residual exceeds 1e-10.
VecC solve_linear(const SpMat& A, const VecC& b);

struct EigenOptions {
    double shift = 0.0;
    double tol = 1e-11;        // relative Ritz residual in the transformed problem
    int max_restarts = 400;
    int block = 2;             // starting block size, resolves double eigenvalues
    int subspace = 0;          // Krylov dimension; 0 picks max(2k+20, 40)
    int dense_limit = 400;     // dense generalized solver at or below this size
    std::uint64_t seed = 0x5eed1234ULL;
};

struct EigenResult {
    std::vector<double> values;    // ascending
    MatC vectors;                  // columns, M-orthonormal
    std::vector<double> residuals; // ||Kv - lambda Mv|| / ||v||
    int iterations = 0;
    bool converged = true;
};

// k smallest eigenpairs of K v = lambda M v above `shift`, K Hermitian and M
// Hermitian positive definite. Uses shift-invert block Krylov-Schur with full
// reorthogonalization, or a dense solver for small pencils.
EigenResult smallest_eigenpairs(const SpMat& K, const SpMat& M, int k,
                                const EigenOptions& opts = {});

EigenResult dense_eigenpairs(const SpMat& K, const SpMat& M, int k,
                             double shift = -1e300);

// Bracketed root of a scalar function (TOMS 748). Requires f(a)f(b) <= 0.
double find_root(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12);

// Frobenius-style max-entry scale used to normalize residuals.
double max_abs_entry(const SpMat& A);

// Largest entrywise deviation |A_ij - conj(A_ji)|.
double hermitian_defect(const SpMat& A);

} // namespace qwg
