#include "anderloc/spectral.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "anderloc/rng.hpp"

namespace anderloc::spectral {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using SpMatC = Eigen::SparseMatrix<std::complex<double>>;

double operator_norm(const MatrixXcd& block) {
    if (block.size() == 0) return 0.0;
    Eigen::JacobiSVD<MatrixXcd> svd(block);
    return svd.singularValues()[0];
}

double operator_norm(const MatrixXd& block) {
    if (block.size() == 0) return 0.0;
    Eigen::JacobiSVD<MatrixXd> svd(block);
    return svd.singularValues()[0];
}

// ---------------------------------------------------------------- Lanczos

namespace {

struct LanczosResult {
    double value = 0.0;
    VectorXd vector;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

// smallest Ritz pair via Lanczos with full reorthogonalization and restarts
LanczosResult lanczos_smallest(const SpMat& A, double tol, int max_restarts = 8,
                               int steps_per_restart = 200) {
    const long dim = A.rows();
    LanczosResult res;
    CounterRng rng(0x1a2b3c4dULL);
    VectorXd v(dim);
    for (long i = 0; i < dim; ++i) v[i] = rng.uniform01(7, static_cast<std::uint64_t>(i)) - 0.5;
    v.normalize();

    const double scale = std::max(1.0, A.coeffs().cwiseAbs().maxCoeff());
    for (int restart = 0; restart < max_restarts; ++restart) {
        const int m = static_cast<int>(std::min<long>(steps_per_restart, dim));
        MatrixXd V(dim, m);
        VectorXd alpha(m), beta(m);
        V.col(0) = v;
        VectorXd w;
        int built = m;
        for (int j = 0; j < m; ++j) {
            w = A * V.col(j);
            alpha[j] = V.col(j).dot(w);
            w -= alpha[j] * V.col(j);
            if (j > 0) w -= beta[j - 1] * V.col(j - 1);
            // full reorthogonalization, twice
            for (int pass = 0; pass < 2; ++pass)
                w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
            beta[j] = w.norm();
            if (j + 1 < m) {
                if (beta[j] < 1e-14 * scale) { built = j + 1; break; }
                V.col(j + 1) = w / beta[j];
            }
        }
        MatrixXd T = MatrixXd::Zero(built, built);
        for (int j = 0; j < built; ++j) {
            T(j, j) = alpha[j];
            if (j + 1 < built) T(j, j + 1) = T(j + 1, j) = beta[j];
        }
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(T);
        VectorXd ritz = V.leftCols(built) * es.eigenvectors().col(0);
        ritz.normalize();
        double lambda = es.eigenvalues()[0];
        double resid = (A * ritz - lambda * ritz).norm();
        res.value = lambda;
        res.vector = ritz;
        res.residual = resid;
        res.iterations += built;
        if (resid <= tol * std::max(1.0, std::abs(lambda))) {
            res.converged = true;
            return res;
        }
        v = ritz;
    }
    return res;
}

} // namespace

double ground_energy(const SparseOperator& H, const SolverOptions& opts) {
    const long dim = H.dim();
    if (dim <= 600 || dim < opts.dense_cap / 4) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(MatrixXd(H.mat), Eigen::EigenvaluesOnly);
        return es.eigenvalues()[0];
    }
    auto res = lanczos_smallest(H.mat, opts.eig_rel_tol * 1e-2);
    if (!res.converged) {
        if (dim < opts.dense_cap) {
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(MatrixXd(H.mat), Eigen::EigenvaluesOnly);
            return es.eigenvalues()[0];
        }
        std::ostringstream msg;
        msg << "ground_energy: Lanczos did not converge (dim " << dim << ", iterations "
            << res.iterations << ", residual " << res.residual << ")";
        throw std::runtime_error(msg.str());
    }
    return res.value;
}

EigenSet eigenpairs_in_window(const SparseOperator& H, const EnergyWindow& I,
                              const SolverOptions& opts) {
    if (!(I.lo <= I.hi)) throw std::invalid_argument("energy window must satisfy lo <= hi");
    const long dim = H.dim();
    EigenSet out;
    if (dim <= opts.dense_cap) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es((MatrixXd(H.mat)));
        std::vector<int> keep;
        for (int i = 0; i < dim; ++i)
            if (I.contains(es.eigenvalues()[i])) keep.push_back(i);
        if (static_cast<int>(keep.size()) > opts.eigenpair_budget)
            throw std::runtime_error("eigenpairs_in_window: window too wide, " +
                                     std::to_string(keep.size()) + " pairs exceed budget");
        out.values.resize(keep.size());
        out.vectors.resize(dim, keep.size());
        out.residuals.resize(keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) {
            out.values[i] = es.eigenvalues()[keep[i]];
            out.vectors.col(i) = es.eigenvectors().col(keep[i]);
            out.residuals[i] =
                (H.mat * out.vectors.col(i) - out.values[i] * out.vectors.col(i)).norm();
        }
        return out;
    }

    // shift-invert Lanczos about the window center with deflation
    const double sigma = 0.5 * (I.lo + I.hi);
    SpMat A = H.mat;
    for (long i = 0; i < dim; ++i) A.coeffRef(i, i) -= sigma;
    Eigen::SparseLU<SpMat> lu(A);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("eigenpairs_in_window: shift-invert factorization failed");

    std::vector<double> vals;
    std::vector<VectorXd> vecs;
    CounterRng rng(0x51f7eedULL);
    VectorXd v(dim);
    for (long i = 0; i < dim; ++i) v[i] = rng.uniform01(3, static_cast<std::uint64_t>(i)) - 0.5;
    const int m = static_cast<int>(std::min<long>(400, dim));
    for (int sweep = 0; sweep < 8; ++sweep) {
        // orthogonalize start vector against converged eigenvectors
        for (const auto& u : vecs) v -= u.dot(v) * u;
        v.normalize();
        MatrixXd V(dim, m);
        VectorXd alpha(m), beta(m);
        V.col(0) = v;
        int built = m;
        for (int j = 0; j < m; ++j) {
            VectorXd w = lu.solve(V.col(j));
            for (const auto& u : vecs) w -= u.dot(w) * u;
            alpha[j] = V.col(j).dot(w);
            w -= alpha[j] * V.col(j);
            if (j > 0) w -= beta[j - 1] * V.col(j - 1);
            for (int pass = 0; pass < 2; ++pass)
                w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
            beta[j] = w.norm();
            if (j + 1 < m) {
                if (beta[j] < 1e-13) { built = j + 1; break; }
                V.col(j + 1) = w / beta[j];
            }
        }
        MatrixXd T = MatrixXd::Zero(built, built);
        for (int j = 0; j < built; ++j) {
            T(j, j) = alpha[j];
            if (j + 1 < built) T(j, j + 1) = T(j + 1, j) = beta[j];
        }
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(T);
        bool found_new = false;
        for (int i = built - 1; i >= 0; --i) { // largest theta = closest to sigma
            double theta = es.eigenvalues()[i];
            if (std::abs(theta) < 1e-12) continue;
            double lambda = sigma + 1.0 / theta;
            if (lambda < I.lo - 0.5 * I.width() - 1e-9 || lambda > I.hi + 0.5 * I.width() + 1e-9)
                continue;
            VectorXd u = V.leftCols(built) * es.eigenvectors().col(i);
            u.normalize();
            double resid = (H.mat * u - lambda * u).norm();
            if (resid > opts.eig_rel_tol * std::max(1.0, std::abs(lambda))) continue;
            bool dup = false;
            for (const auto& prev : vecs)
                if (std::abs(prev.dot(u)) > 0.1) { dup = true; break; }
            if (dup) continue;
            vals.push_back(lambda);
            vecs.push_back(u);
            found_new = true;
            if (static_cast<int>(vals.size()) > opts.eigenpair_budget)
                throw std::runtime_error("eigenpairs_in_window: eigenpair budget exceeded");
        }
        if (!found_new) break;
        for (long i = 0; i < dim; ++i)
            v[i] = rng.uniform01(100 + sweep, static_cast<std::uint64_t>(i)) - 0.5;
    }

    std::vector<int> order(vals.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    std::vector<int> keep;
    for (int i : order)
        if (I.contains(vals[i])) keep.push_back(i);
    out.values.resize(keep.size());
    out.vectors.resize(dim, keep.size());
    out.residuals.resize(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        out.values[i] = vals[keep[i]];
        out.vectors.col(i) = vecs[keep[i]];
        out.residuals[i] = (H.mat * out.vectors.col(i) - out.values[i] * out.vectors.col(i)).norm();
    }
    return out;
}

// ---------------------------------------------------------------- resolvent

double resolvent_block_norm_cells(const SparseOperator& H, std::complex<double> z,
                                  const CellIndex& cx, const CellIndex& cy,
                                  const SolverOptions& opts) {
    if (cx.empty() || cy.empty())
        throw std::invalid_argument("resolvent_block_norm: empty cell");
    if (static_cast<int>(cy.size()) > opts.cell_column_cap ||
        static_cast<int>(cx.size()) > opts.cell_column_cap)
        throw std::invalid_argument("resolvent_block_norm: cell exceeds column cap");
    const long dim = H.dim();
    SpMatC A = H.mat.cast<std::complex<double>>();
    for (long i = 0; i < dim; ++i) A.coeffRef(i, i) -= z;
    A.makeCompressed();

    MatrixXcd block(cx.size(), cy.size());
    if (dim <= opts.direct_solve_cap) {
        Eigen::SparseLU<SpMatC> lu(A);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("resolvent_block_norm: factorization failed");
        for (std::size_t c = 0; c < cy.size(); ++c) {
            VectorXcd e = VectorXcd::Zero(dim);
            e[cy[c]] = 1.0;
            VectorXcd u = lu.solve(e);
            for (std::size_t r = 0; r < cx.size(); ++r) block(r, c) = u[cx[r]];
        }
    } else {
        Eigen::BiCGSTAB<SpMatC, Eigen::DiagonalPreconditioner<std::complex<double>>> solver;
        solver.setTolerance(opts.solve_tol);
        solver.setMaxIterations(20000);
        solver.compute(A);
        for (std::size_t c = 0; c < cy.size(); ++c) {
            VectorXcd e = VectorXcd::Zero(dim);
            e[cy[c]] = 1.0;
            VectorXcd u = solver.solve(e);
            if (solver.info() != Eigen::Success)
                throw std::runtime_error("resolvent_block_norm: iterative solve breakdown");
            for (std::size_t r = 0; r < cx.size(); ++r) block(r, c) = u[cx[r]];
        }
    }
    return operator_norm(block);
}

double resolvent_block_norm(const SparseOperator& H, std::complex<double> z,
                            const geometry::Configuration& x, const geometry::Configuration& y,
                            const SolverOptions& opts) {
    auto cx = geometry::cell_indicator(x, *H.grid);
    auto cy = geometry::cell_indicator(y, *H.grid);
    return resolvent_block_norm_cells(H, z, cx, cy, opts);
}

// ---------------------------------------------------------------- projectors

ProjectorBlocks projector_block_norms(const EigenSet& eig, const CellIndex& cx,
                                      const CellIndex& cy, double cluster_tol) {
    ProjectorBlocks out;
    const int m = eig.count();
    int i = 0;
    while (i < m) {
        int j = i + 1;
        while (j < m &&
               eig.values[j] - eig.values[j - 1] <= cluster_tol * (1.0 + std::abs(eig.values[j])))
            ++j;
        const int rank = j - i;
        MatrixXd X(cx.size(), rank), Y(cy.size(), rank);
        for (int r = 0; r < rank; ++r) {
            for (std::size_t a = 0; a < cx.size(); ++a) X(a, r) = eig.vectors(cx[a], i + r);
            for (std::size_t b = 0; b < cy.size(); ++b) Y(b, r) = eig.vectors(cy[b], i + r);
        }
        out.eigenvalues.push_back(eig.values[i]);
        out.norms.push_back(operator_norm(MatrixXd(X * Y.transpose())));
        out.sum += out.norms.back();
        i = j;
    }
    return out;
}

// ---------------------------------------------------------------- cutoff

CutoffFunction::CutoffFunction(EnergyWindow J, double r, int N) : J_(J), r_(r), N_(N) {
    if (r <= 0) throw std::invalid_argument("cutoff margin r must be positive");
    if (N < 2) throw std::invalid_argument("cutoff order N must be >= 2");
    if (N > 40) throw std::invalid_argument("cutoff order N beyond polynomial-degree budget");
}

int CutoffFunction::order_for_distance(double delta, double dist) {
    int N = static_cast<int>(std::floor(delta * dist)) + 2;
    return std::max(2, std::min(N, 40));
}

// k-th derivative of the Irwin-Hall CDF F_N at s in [0, N]
double CutoffFunction::ramp(double s, int k) const {
    if (s <= 0.0) return 0.0;
    if (s >= N_ && k == 0) return 1.0;
    if (s >= N_) return 0.0;
    // F_N^(k)(s) = 1/(N-k)! sum_{j<=floor(s)} (-1)^j C(N,j) (s-j)^{N-k}
    if (k > N_) return 0.0;
    double sum = 0.0;
    double binom = 1.0;
    const int jmax = static_cast<int>(std::floor(s));
    for (int j = 0; j <= jmax; ++j) {
        sum += (j % 2 == 0 ? 1.0 : -1.0) * binom * std::pow(s - j, N_ - k);
        binom *= static_cast<double>(N_ - j) / (j + 1);
    }
    double fact = 1.0;
    for (int i = 2; i <= N_ - k; ++i) fact *= i;
    return sum / fact;
}

double CutoffFunction::operator()(double E) const {
    const double dist = J_.dist(E);
    if (dist <= r_) return 0.0;
    if (dist >= 2.0 * r_) return 1.0;
    const double w = r_ / N_;
    return ramp((dist - r_) / w, 0);
}

double CutoffFunction::derivative(double E, int k) const {
    if (k == 0) return (*this)(E);
    const double dist = J_.dist(E);
    if (dist <= r_ || dist >= 2.0 * r_) return 0.0;
    const double w = r_ / N_;
    double val = ramp((dist - r_) / w, k) / std::pow(w, k);
    // left flank: dist decreases in E, chain rule gives (-1)^k
    if (E < J_.lo && k % 2 == 1) val = -val;
    return val;
}

CutoffFunction gevrey_cutoff(const EnergyWindow& J, double r, int N) {
    return CutoffFunction(J, r, N);
}

double restricted_resolvent_block_norm(const SparseOperator& H, std::complex<double> z,
                                       const CutoffFunction& cutoff,
                                       const geometry::Configuration& x,
                                       const geometry::Configuration& y,
                                       const SolverOptions& opts) {
    const long dim = H.dim();
    if (dim > 2 * opts.dense_cap)
        throw std::runtime_error("restricted_resolvent_block_norm: instance too large for dense decomposition");
    auto cx = geometry::cell_indicator(x, *H.grid);
    auto cy = geometry::cell_indicator(y, *H.grid);
    if (cx.empty() || cy.empty())
        throw std::invalid_argument("restricted_resolvent_block_norm: empty cell");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es((MatrixXd(H.mat)));
    MatrixXcd block = MatrixXcd::Zero(cx.size(), cy.size());
    for (long i = 0; i < dim; ++i) {
        const double lam = es.eigenvalues()[i];
        const double c = cutoff(lam);
        if (c == 0.0) continue;
        std::complex<double> f = c / (lam - z);
        VectorXd vx(cx.size()), vy(cy.size());
        for (std::size_t a = 0; a < cx.size(); ++a) vx[a] = es.eigenvectors()(cx[a], i);
        for (std::size_t b = 0; b < cy.size(); ++b) vy[b] = es.eigenvectors()(cy[b], i);
        block += f * (vx * vy.transpose()).cast<std::complex<double>>();
    }
    return operator_norm(block);
}

} // namespace anderloc::spectral
