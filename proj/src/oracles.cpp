#include "anderloc/oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "anderloc/rng.hpp"

namespace anderloc::oracles {

TransferMatrixResult transfer_matrix_lyapunov(const model::DisorderDistribution& disorder,
                                              double E, long length, int replicas,
                                              std::uint64_t seed) {
    if (length < 1 || replicas < 1)
        throw std::invalid_argument("transfer_matrix_lyapunov: need positive length and replicas");
    CounterRng rng(seed);
    std::vector<double> gammas(replicas);
    for (int r = 0; r < replicas; ++r) {
        double u0 = 1.0, u1 = 0.0; // (u_i, u_{i-1})
        double log_scale = 0.0;
        for (long i = 0; i < length; ++i) {
            double v = disorder.sample(rng.uniform01(static_cast<std::uint64_t>(r),
                                                     static_cast<std::uint64_t>(i)));
            double next = (2.0 + v - E) * u0 - u1;
            u1 = u0;
            u0 = next;
            if ((i & 7) == 7) {
                double nrm = std::max(std::abs(u0), std::abs(u1));
                if (nrm > 0) {
                    log_scale += std::log(nrm);
                    u0 /= nrm;
                    u1 /= nrm;
                }
            }
        }
        double nrm = std::max(std::abs(u0), std::abs(u1));
        if (nrm > 0) log_scale += std::log(nrm);
        gammas[r] = log_scale / static_cast<double>(length);
    }
    TransferMatrixResult res;
    res.energy = E;
    res.length = length;
    res.replicas = replicas;
    double sum = 0;
    for (double g : gammas) sum += g;
    res.gamma = sum / replicas;
    if (replicas > 1) {
        double ss = 0;
        for (double g : gammas) ss += (g - res.gamma) * (g - res.gamma);
        res.stderr_ = std::sqrt(ss / (replicas - 1)) / std::sqrt(static_cast<double>(replicas));
    }
    return res;
}

double free_chain_lyapunov(double E) {
    double tr = 2.0 - E; // trace of the free transfer matrix
    double disc = tr * tr - 4.0;
    if (disc <= 0) return 0.0; // inside the band
    double root = 0.5 * (std::abs(tr) + std::sqrt(disc));
    return std::log(root);
}

DenseEig dense_brute_force(const model::SparseOperator& H) {
    if (H.dim() > 2000)
        throw std::invalid_argument("dense_brute_force: dimension exceeds 2000");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((Eigen::MatrixXd(H.mat)));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("dense_brute_force: eigensolver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

double dense_resolvent_block_norm(const DenseEig& eig, std::complex<double> z,
                                  const std::vector<long>& cx, const std::vector<long>& cy) {
    // block_{ab} = sum_E v_E(x_a) v_E(y_b) / (E - z)
    Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(cx.size(), cy.size());
    for (int k = 0; k < eig.values.size(); ++k) {
        std::complex<double> f = 1.0 / (eig.values[k] - z);
        for (std::size_t a = 0; a < cx.size(); ++a)
            for (std::size_t b = 0; b < cy.size(); ++b)
                block(a, b) += f * eig.vectors(cx[a], k) * eig.vectors(cy[b], k);
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(block);
    return svd.singularValues()[0];
}

int inertia_count_below(const Eigen::MatrixXd& H, double E) {
    // Sturm count on the Householder tridiagonalization of H - E
    Eigen::Tridiagonalization<Eigen::MatrixXd> tri(H);
    Eigen::VectorXd diag = tri.diagonal();
    Eigen::VectorXd sub = tri.subDiagonal();
    const int n = static_cast<int>(diag.size());
    int count = 0;
    double q = diag[0] - E;
    if (q < 0) ++count;
    const double tiny = 1e-300;
    for (int i = 1; i < n; ++i) {
        if (std::abs(q) < tiny) q = q < 0 ? -tiny : tiny;
        q = (diag[i] - E) - sub[i - 1] * sub[i - 1] / q;
        if (q < 0) ++count;
    }
    return count;
}

double hausdorff_brute(const std::vector<std::vector<double>>& x,
                       const std::vector<std::vector<double>>& y) {
    if (x.size() != y.size() || x.empty())
        throw std::invalid_argument("hausdorff_brute: particle count mismatch");
    auto maxnorm = [](const std::vector<double>& a, const std::vector<double>& b) {
        double m = 0;
        for (std::size_t c = 0; c < a.size(); ++c) m = std::max(m, std::abs(a[c] - b[c]));
        return m;
    };
    double result = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        double mn = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < y.size(); ++k) mn = std::min(mn, maxnorm(x[j], y[k]));
        result = std::max(result, mn);
    }
    for (std::size_t k = 0; k < y.size(); ++k) {
        double mn = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < x.size(); ++j) mn = std::min(mn, maxnorm(x[j], y[k]));
        result = std::max(result, mn);
    }
    return result;
}

std::vector<double> dirichlet_chain_eigenvalues(int m) {
    std::vector<double> ev(m);
    for (int k = 1; k <= m; ++k) ev[k - 1] = 2.0 - 2.0 * std::cos(k * M_PI / (m + 1));
    std::sort(ev.begin(), ev.end());
    return ev;
}

} // namespace anderloc::oracles
