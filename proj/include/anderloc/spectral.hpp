#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "anderloc/geometry.hpp"
#include "anderloc/model.hpp"

namespace anderloc::spectral {

using geometry::CellIndex;
using model::SparseOperator;

struct EnergyWindow {
    double lo = 0.0;
    double hi = 0.0;
    std::string label;

    bool contains(double e) const { return e >= lo && e <= hi; }
    double width() const { return hi - lo; }
    double dist(double e) const {
        if (e < lo) return lo - e;
        if (e > hi) return e - hi;
        return 0.0;
    }
};

struct EigenSet {
    Eigen::VectorXd values;  // ascending
    Eigen::MatrixXd vectors; // columns matching values
    Eigen::VectorXd residuals;

    int count() const { return static_cast<int>(values.size()); }
};

struct SolverOptions {
    long dense_cap = 2000;      // dense fallback below this dimension
    long direct_solve_cap = 50000;
    int cell_column_cap = 64;   // largest cell treated exactly
    double eig_rel_tol = 1e-8;
    double solve_tol = 1e-10;
    int eigenpair_budget = 4096;
};

// smallest eigenvalue; Lanczos with full reorthogonalization, dense fallback
double ground_energy(const SparseOperator& H, const SolverOptions& opts = {});

// all eigenpairs with eigenvalue in I (dense path for desk-scale instances,
// shift-invert Lanczos beyond); residuals checked against eig_rel_tol
EigenSet eigenpairs_in_window(const SparseOperator& H, const EnergyWindow& I,
                              const SolverOptions& opts = {});

// || chi_x (H - z)^{-1} chi_y ||: per-column sparse solve, SVD of the block
double resolvent_block_norm(const SparseOperator& H, std::complex<double> z,
                            const geometry::Configuration& x, const geometry::Configuration& y,
                            const SolverOptions& opts = {});
double resolvent_block_norm_cells(const SparseOperator& H, std::complex<double> z,
                                  const CellIndex& cx, const CellIndex& cy,
                                  const SolverOptions& opts = {});

struct ProjectorBlocks {
    std::vector<double> eigenvalues;
    std::vector<double> norms; // || chi_x P_E chi_y || per (clustered) eigenvalue
    double sum = 0.0;
};

// blocks of spectral projectors, assembled from an eigen-decomposition;
// eigenvalues closer than the clustering tolerance share one projector
ProjectorBlocks projector_block_norms(const EigenSet& eig, const CellIndex& cx,
                                      const CellIndex& cy, double cluster_tol = 1e-8);

// Smooth window with Gevrey-type derivative bounds: chi = 0 within distance r
// of J, chi = 1 beyond 2r, built as an N-fold convolution of a step with
// equal-width box mollifiers (width r/N). Piecewise polynomial (Irwin-Hall),
// so derivatives are exact, with |chi^(k)| <= c (A N / r)^k, c = 1, A = 2.
class CutoffFunction {
public:
    CutoffFunction(EnergyWindow J, double r, int N);

    double operator()(double E) const;
    double derivative(double E, int k) const;

    const EnergyWindow& window() const { return J_; }
    double margin() const { return r_; }
    int order() const { return N_; }
    double bound_c() const { return 1.0; }
    double bound_A() const { return 2.0; }

    // order selection from the distance schedule delta*dist in [N-2, N-1)
    static int order_for_distance(double delta, double dist);

private:
    double ramp(double s, int k) const; // k-th derivative of the Irwin-Hall CDF
    EnergyWindow J_;
    double r_;
    int N_;
};

CutoffFunction gevrey_cutoff(const EnergyWindow& J, double r, int N);

// || chi_x f(H) chi_y || with f(E) = chi(E)/(E - z), from the full spectral
// decomposition (desk-scale only)
double restricted_resolvent_block_norm(const SparseOperator& H, std::complex<double> z,
                                       const CutoffFunction& cutoff,
                                       const geometry::Configuration& x,
                                       const geometry::Configuration& y,
                                       const SolverOptions& opts = {});

// spectral-norm of a (possibly complex) dense block
double operator_norm(const Eigen::MatrixXcd& block);
double operator_norm(const Eigen::MatrixXd& block);

} // namespace anderloc::spectral
