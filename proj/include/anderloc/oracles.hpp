#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <vector>

#include "anderloc/model.hpp"

namespace anderloc::oracles {

// Independent references for the numerical modules: none of these share
// kernel code with the implementation paths they validate.

struct TransferMatrixResult {
    double energy = 0.0;
    double gamma = 0.0;   // Lyapunov exponent per lattice unit
    double stderr_ = 0.0; // across replica chains
    long length = 0;
    int replicas = 0;
};

// product of 2x2 transfer matrices for the 1-d lattice chain
// u_{i+1} = (2 + V_i - E) u_i - u_{i-1}, with periodic renormalization
TransferMatrixResult transfer_matrix_lyapunov(const model::DisorderDistribution& disorder,
                                              double E, long length, int replicas,
                                              std::uint64_t seed);

// closed form for zero disorder and E outside the band [0,4]:
// log of the larger root of t^2 - (2-E) t + 1 = 0
double free_chain_lyapunov(double E);

struct DenseEig {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

// full dense eigendecomposition, dimension <= 2000
DenseEig dense_brute_force(const model::SparseOperator& H);

// resolvent block norm via the eigenpair spectral sum (independent of the
// sparse-solve path in `spectral`)
double dense_resolvent_block_norm(const DenseEig& eig, std::complex<double> z,
                                  const std::vector<long>& cx, const std::vector<long>& cy);

// eigenvalue count below E by Sturm sequences on the tridiagonalized matrix
int inertia_count_below(const Eigen::MatrixXd& H, double E);

// literal double-loop Hausdorff distance on plain containers (max-norm)
double hausdorff_brute(const std::vector<std::vector<double>>& x,
                       const std::vector<std::vector<double>>& y);

// Dirichlet Laplacian eigenvalues of a length-m chain: 2 - 2 cos(k pi/(m+1))
std::vector<double> dirichlet_chain_eigenvalues(int m);

} // namespace anderloc::oracles
