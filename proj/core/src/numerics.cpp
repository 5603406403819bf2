#include "qwg/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#ifdef QWG_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif
#include <boost/math/tools/toms748_solve.hpp>

namespace qwg {

struct LinearSolver::Impl {
    SpMat A; // the factorization may refer back to the matrix
#ifdef QWG_HAVE_UMFPACK
    Eigen::UmfPackLU<SpMat> lu;
#else
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
#endif
};

LinearSolver::LinearSolver(const SpMat& A) : impl_(std::make_unique<Impl>()), n_(A.rows()) {
    if (A.rows() != A.cols()) throw NumericsError("solve_linear: matrix is not square");
    impl_->A = A;
    impl_->A.makeCompressed();
    impl_->lu.analyzePattern(impl_->A);
    impl_->lu.factorize(impl_->A);
    if (impl_->lu.info() != Eigen::Success)
        throw NumericsError("solve_linear: factorization failed (singular pivot)");
}

LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

VecC LinearSolver::solve(const VecC& b) const {
    VecC x = impl_->lu.solve(b);
    if (impl_->lu.info() != Eigen::Success) throw NumericsError("solve_linear: solve failed");
    return x;
}

MatC LinearSolver::solve(const MatC& B) const {
    MatC X = impl_->lu.solve(B);
    if (impl_->lu.info() != Eigen::Success) throw NumericsError("solve_linear: solve failed");
    return X;
}

VecC solve_linear(const SpMat& A, const VecC& b) {
    LinearSolver s(A);
    VecC x = s.solve(b);
    const double nb = b.norm();
    const double res = (A * x - b).norm();
    if (!std::isfinite(res) || res > 1e-10 * std::max(nb, std::numeric_limits<double>::min()))
        throw NumericsError("solve_linear: residual " + std::to_string(res / nb) + " above 1e-10");
    return x;
}

double max_abs_entry(const SpMat& A) {
    double m = 0.0;
    for (int c = 0; c < A.outerSize(); ++c)
        for (SpMat::InnerIterator it(A, c); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

double hermitian_defect(const SpMat& A) {
    SpMat D = A - SpMat(A.adjoint());
    return max_abs_entry(D);
}

namespace {

void fill_random(MatC& X, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const double re = nd(rng);
            const double im = nd(rng);
            X(i, j) = cplx(re, im);
        }
}

void true_residuals(const SpMat& K, const SpMat& M, EigenResult& r) {
    r.residuals.resize(r.values.size());
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        const VecC v = r.vectors.col(static_cast<Eigen::Index>(i));
        r.residuals[i] = (K * v - r.values[i] * (M * v)).norm() / v.norm();
    }
}

} // namespace

EigenResult dense_eigenpairs(const SpMat& K, const SpMat& M, int k, double shift) {
    const MatC Kd = MatC(K);
    const MatC Md = MatC(M);
    Eigen::GeneralizedSelfAdjointEigenSolver<MatC> es(Kd, Md);
    if (es.info() != Eigen::Success) throw NumericsError("dense eigensolver failed");
    EigenResult r;
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < es.eigenvalues().size() && static_cast<int>(idx.size()) < k; ++i)
        if (es.eigenvalues()(i) > shift) idx.push_back(i);
    r.vectors.resize(K.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
        r.values.push_back(es.eigenvalues()(idx[j]));
        r.vectors.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(idx[j]);
    }
    true_residuals(K, M, r);
    return r;
}

EigenResult smallest_eigenpairs(const SpMat& K, const SpMat& M, int k, const EigenOptions& opts) {
    const Eigen::Index n = K.rows();
    if (K.cols() != n || M.rows() != n || M.cols() != n)
        throw NumericsError("smallest_eigenpairs: dimension mismatch");
    if (k <= 0) return {};
    if (n <= opts.dense_limit) return dense_eigenpairs(K, M, k, opts.shift);

    const int b = std::max(1, opts.block);
    int m = opts.subspace > 0 ? opts.subspace : std::max(2 * k + 20, 40);
    m = std::min<int>(m, static_cast<int>(n) - b);
    if (m < k + b + 1) throw NumericsError("smallest_eigenpairs: problem too small for Krylov solver");

    SpMat A = K - opts.shift * M;
    A.makeCompressed();
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
    ldlt.compute(A);
    if (ldlt.info() != Eigen::Success) throw NumericsError("smallest_eigenpairs: shifted factorization failed");

    std::mt19937_64 rng(opts.seed);
    MatC V(n, m + b), MV(n, m + b);
    MatC H = MatC::Zero(m + b, m);

    {
        MatC R(n, b);
        fill_random(R, rng);
        for (int j = 0; j < b; ++j) {
            // plain orthonormalization of the starting block
            VecC w = R.col(j);
            for (int pass = 0; pass < 2; ++pass)
                if (j > 0) w -= V.leftCols(j) * (MV.leftCols(j).adjoint() * w);
            VecC Mw = M * w;
            const double beta = std::sqrt(std::real(w.dot(Mw)));
            V.col(j) = w / beta;
            MV.col(j) = Mw / beta;
        }
    }

    EigenResult result;
    Eigen::Index j0 = 0;
    Eigen::VectorXd theta;
    MatC Y;
    int restart = 0;
    bool converged = false;
    for (; restart < opts.max_restarts; ++restart) {
        for (Eigen::Index j = j0; j < m; ++j) {
            VecC w = ldlt.solve(MV.col(j));
            const Eigen::Index nv = j + b;
            VecC coeff = VecC::Zero(nv);
            for (int pass = 0; pass < 2; ++pass) {
                VecC h = MV.leftCols(nv).adjoint() * w;
                w -= V.leftCols(nv) * h;
                coeff += h;
            }
            H.col(j).head(nv) += coeff;
            VecC Mw = M * w;
            double beta = std::sqrt(std::max(0.0, std::real(w.dot(Mw))));
            if (beta <= 1e-13 * std::max(1.0, coeff.norm())) {
                // invariant subspace found: continue with a fresh random direction
                MatC r(n, 1);
                fill_random(r, rng);
                w = r.col(0);
                for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(nv) * (MV.leftCols(nv).adjoint() * w);
                Mw = M * w;
                const double nb = std::sqrt(std::real(w.dot(Mw)));
                V.col(nv) = w / nb;
                MV.col(nv) = Mw / nb;
                H(nv, j) = 0.0;
            } else {
                V.col(nv) = w / beta;
                MV.col(nv) = Mw / beta;
                H(nv, j) = beta;
            }
        }
        const MatC Hm = H.topLeftCorner(m, m);
        const MatC Hs = 0.5 * (Hm + Hm.adjoint());
        Eigen::SelfAdjointEigenSolver<MatC> es(Hs);
        // descending order of theta = 1/(lambda - shift)
        theta = es.eigenvalues().reverse();
        Y = es.eigenvectors().rowwise().reverse();
        const MatC coupling = H.bottomRows(b) * Y; // b x m
        int nconv = 0;
        for (int i = 0; i < k; ++i) {
            const double r = coupling.col(i).norm();
            if (r <= opts.tol * std::abs(theta(i))) ++nconv;
            else break;
        }
        if (nconv >= k) {
            converged = true;
            break;
        }
        if (restart + 1 == opts.max_restarts) break;
        const int p = std::max<int>(k + nconv / 2, std::min<int>(k + (m - k - b) / 2, m - b - 1));
        const MatC Yk = Y.leftCols(p);
        MatC Vk = V.leftCols(m) * Yk;
        MatC MVk = MV.leftCols(m) * Yk;
        const MatC tailV = V.middleCols(m, b);
        const MatC tailMV = MV.middleCols(m, b);
        const MatC cp = coupling.leftCols(p);
        V.leftCols(p) = Vk;
        MV.leftCols(p) = MVk;
        V.middleCols(p, b) = tailV;
        MV.middleCols(p, b) = tailMV;
        H.setZero();
        for (int i = 0; i < p; ++i) H(i, i) = theta(i);
        H.block(p, 0, b, p) = cp;
        j0 = p;
    }

    result.iterations = restart;
    result.converged = converged;
    std::vector<std::pair<double, Eigen::Index>> order;
    for (int i = 0; i < k; ++i) order.emplace_back(opts.shift + 1.0 / theta(i), i);
    std::sort(order.begin(), order.end());
    result.vectors.resize(n, k);
    for (int i = 0; i < k; ++i) {
        result.values.push_back(order[i].first);
        VecC x = V.leftCols(m) * Y.col(order[i].second);
        const double nm = std::sqrt(std::real(x.dot(M * x)));
        result.vectors.col(i) = x / nm;
    }
    true_residuals(K, M, result);
    if (!converged)
        throw NumericsError("smallest_eigenpairs: no convergence after " + std::to_string(opts.max_restarts) +
                            " restarts");
    return result;
}

double find_root(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a > b) std::swap(a, b);
    const double fa = f(a);
    const double fb = f(b);
    if (!std::isfinite(fa) || !std::isfinite(fb)) throw NumericsError("find_root: non-finite endpoint value");
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0)) throw NumericsError("find_root: invalid bracket, f(a) and f(b) share a sign");
    const double eps = std::numeric_limits<double>::epsilon();
    auto done = [tol, eps](double lo, double hi) {
        return std::abs(hi - lo) <= std::max(tol, 4.0 * eps * std::max(std::abs(lo), std::abs(hi)));
    };
    std::uintmax_t iters = 500;
    auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, done, iters);
    const double flo = f(r.first);
    if (flo == 0.0) return r.first;
    return 0.5 * (r.first + r.second);
}

} // namespace qwg
